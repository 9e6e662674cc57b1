#include "eoc/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "eoc/error.hpp"
#include "eoc/random.hpp"

namespace eoc::corpus {

std::int32_t Vocab::id(const std::string& word) const {
  const auto it = index_.find(word);
  return it == index_.end() ? kUnknownId : it->second;
}

Vocab Vocab::from_words(const std::vector<std::string>& words) {
  Vocab v;
  for (const auto& w : words) {
    if (v.index_.contains(w)) {
      throw ConfigError("vocab: duplicate word '" + w + "'");
    }
    v.index_.emplace(w, static_cast<std::int32_t>(v.words_.size()));
    v.words_.push_back(w);
  }
  return v;
}

Vocab build_vocab(const std::vector<Review>& reviews, std::int32_t max_vocab) {
  if (max_vocab < 3) {
    throw ConfigError("build_vocab: max_vocab must be >= 3");
  }
  if (reviews.empty()) {
    throw ConfigError("build_vocab: empty corpus");
  }
  std::unordered_map<std::string, std::int64_t> counts;
  for (const auto& r : reviews) {
    for (const auto& t : r.tokens) {
      ++counts[t];
    }
  }
  std::vector<std::pair<std::string, std::int64_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  const auto keep = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(max_vocab - 2));
  std::vector<std::string> words;
  words.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    words.push_back(ranked[i].first);
  }
  return Vocab::from_words(words);
}

TokenSequence encode_review(const Review& review, const Vocab& vocab, std::int32_t length) {
  TokenSequence seq;
  seq.label = review.label;
  seq.ids.assign(static_cast<std::size_t>(length), kPadId);
  const auto n = std::min<std::size_t>(review.tokens.size(), static_cast<std::size_t>(length));
  for (std::size_t t = 0; t < n; ++t) {
    seq.ids[t] = vocab.id(review.tokens[t]);
  }
  return seq;
}

std::vector<TokenSequence> encode_all(const std::vector<Review>& reviews, const Vocab& vocab,
                                      std::int32_t length) {
  std::vector<TokenSequence> out;
  out.reserve(reviews.size());
  for (const auto& r : reviews) {
    out.push_back(encode_review(r, vocab, length));
  }
  return out;
}

std::vector<Review> synth_corpus(const SynthConfig& cfg) {
  if (cfg.vocab_size < 12) {
    throw ConfigError("synth_corpus: vocab_size must be >= 12");
  }
  if (cfg.min_length < 1 || cfg.max_length < cfg.min_length) {
    throw ConfigError("synth_corpus: need 1 <= min_length <= max_length");
  }
  if (cfg.signal_strength < 0.0 || cfg.signal_strength > 1.0) {
    throw ConfigError("synth_corpus: signal_strength must be in [0, 1]");
  }
  const std::int32_t markers = std::max(2, cfg.vocab_size / 10);
  const std::int32_t fillers = cfg.vocab_size - 2 * markers;
  const double agree = 0.5 * (1.0 + cfg.signal_strength);

  std::vector<Review> out;
  out.reserve(static_cast<std::size_t>(cfg.n_reviews));
  for (std::int32_t n = 0; n < cfg.n_reviews; ++n) {
    RandomStream rng(cfg.seed, StreamTag::kCorpus, static_cast<std::uint64_t>(n));
    Review r;
    r.label = n % 2 == 0 ? 1 : 0;
    const auto span = static_cast<std::uint64_t>(cfg.max_length - cfg.min_length + 1);
    const auto len = cfg.min_length + static_cast<std::int32_t>(rng.below(span));
    auto marker = [&] {
      const bool positive = (rng.uniform() < agree) == (r.label == 1);
      const auto k = rng.below(static_cast<std::uint64_t>(markers));
      return (positive ? "pos" : "neg") + std::to_string(k);
    };
    bool has_marker = false;
    r.tokens.reserve(static_cast<std::size_t>(len));
    for (std::int32_t t = 0; t < len; ++t) {
      if (rng.uniform() < cfg.marker_rate) {
        r.tokens.push_back(marker());
        has_marker = true;
      } else {
        r.tokens.push_back("w" + std::to_string(rng.below(static_cast<std::uint64_t>(fillers))));
      }
    }
    if (!has_marker) {
      r.tokens[rng.below(static_cast<std::uint64_t>(len))] = marker();
    }
    out.push_back(std::move(r));
  }
  return out;
}

int marker_vote(const Review& review) {
  int balance = 0;
  for (const auto& t : review.tokens) {
    if (t.starts_with("pos")) {
      ++balance;
    } else if (t.starts_with("neg")) {
      --balance;
    }
  }
  return balance >= 0 ? 1 : 0;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (const char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::isalnum(u)) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) {
    out.push_back(std::move(cur));
  }
  return out;
}

namespace {

void load_label_dir(const std::filesystem::path& dir, int label, std::vector<Review>& out) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw IoError("imdb: missing directory '" + dir.string() + "'");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file()) {
      files.push_back(entry.path());
    }
  }
  if (ec) {
    throw IoError("imdb: cannot list '" + dir.string() + "': " + ec.message());
  }
  if (files.empty()) {
    throw IoError("imdb: no review files in '" + dir.string() + "'");
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw IoError("imdb: cannot read '" + path.string() + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    Review r{tokenize(text.str()), label};
    if (r.tokens.empty()) {
      throw IoError("imdb: review file has no tokens '" + path.string() + "'");
    }
    out.push_back(std::move(r));
  }
}

}  // namespace

std::vector<Review> load_imdb_dir(const std::string& root) {
  std::vector<Review> out;
  load_label_dir(std::filesystem::path(root) / "pos", 1, out);
  load_label_dir(std::filesystem::path(root) / "neg", 0, out);
  return out;
}

std::pair<std::vector<Review>, std::vector<Review>> split(const std::vector<Review>& reviews,
                                                          double train_fraction,
                                                          std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("split: train_fraction must be in (0, 1)");
  }
  RandomStream rng(seed, StreamTag::kSplit);
  const auto perm = seeded_permutation(reviews.size(), rng);
  const auto n_train = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(reviews.size())));
  std::pair<std::vector<Review>, std::vector<Review>> out;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    (i < n_train ? out.first : out.second).push_back(reviews[perm[i]]);
  }
  return out;
}

}  // namespace eoc::corpus
