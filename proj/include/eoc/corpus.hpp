#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace eoc::corpus {

struct Review {
  std::vector<std::string> tokens;
  int label = 0;  // 1 = positive, 0 = negative

  friend bool operator==(const Review&, const Review&) = default;
};

struct TokenSequence {
  std::vector<std::int32_t> ids;
  int label = 0;
};

inline constexpr std::int32_t kPadId = 0;
inline constexpr std::int32_t kUnknownId = 1;

class Vocab {
 public:
  std::int32_t id(const std::string& word) const;
  const std::string& word(std::int32_t id) const { return words_.at(static_cast<std::size_t>(id)); }
  std::int32_t size() const { return static_cast<std::int32_t>(words_.size()); }
  const std::map<std::string, std::int32_t>& entries() const { return index_; }

  /// Builds from an explicit id-ordered word list (ids >= 2).
  static Vocab from_words(const std::vector<std::string>& words);

 private:
  std::vector<std::string> words_{"<pad>", "<unk>"};
  std::map<std::string, std::int32_t> index_;
};

/// Most frequent words first, ties broken lexicographically; at most
/// max_vocab entries including the two reserved ids.
Vocab build_vocab(const std::vector<Review>& reviews, std::int32_t max_vocab);

/// Truncates to the first `length` tokens or post-pads with id 0.
TokenSequence encode_review(const Review& review, const Vocab& vocab, std::int32_t length);

std::vector<TokenSequence> encode_all(const std::vector<Review>& reviews, const Vocab& vocab,
                                      std::int32_t length);

struct SynthConfig {
  std::int32_t n_reviews = 2000;
  std::int32_t vocab_size = 200;
  std::int32_t min_length = 20;
  std::int32_t max_length = 80;
  /// Fraction of markers agreeing with the label is (1 + signal_strength) / 2.
  double signal_strength = 0.3;
  /// Probability that a token position carries a sentiment marker.
  double marker_rate = 0.15;
  std::uint64_t seed = 1;
};

/// Synthetic sentiment reviews. Words are "pos<k>", "neg<k>" (markers) and
/// "w<k>" (neutral filler). Labels alternate so the classes stay balanced.
std::vector<Review> synth_corpus(const SynthConfig& cfg);

/// Majority vote of pos/neg markers; ties go positive.
int marker_vote(const Review& review);

/// Lowercase alphanumeric runs.
std::vector<std::string> tokenize(const std::string& text);

/// Reads <root>/pos/* (label 1) then <root>/neg/* (label 0), files in
/// lexicographic order.
std::vector<Review> load_imdb_dir(const std::string& root);

/// Seeded shuffle then prefix split; train size = floor(fraction * n).
std::pair<std::vector<Review>, std::vector<Review>> split(const std::vector<Review>& reviews,
                                                          double train_fraction,
                                                          std::uint64_t seed);

}  // namespace eoc::corpus
