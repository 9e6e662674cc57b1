// Sentiment classifier on top of the LSTM cell: forward pass, binary
// cross-entropy, backpropagation through time, Adam, and evaluation.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "eoc/corpus.hpp"
#include "eoc/lstm.hpp"

namespace eoc::train {

using corpus::TokenSequence;

struct AdamState {
  Params m;
  Params v;
  std::int64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double lr = 0.0005;

  static AdamState for_params(const Params& params, double lr = 0.0005);
};

/// Uniform in [-s, s] with s = 1/sqrt(hidden) for every weight matrix and
/// the output head, zero biases, uniform in [-embed_scale, embed_scale] for
/// embedding rows >= 1; row 0 (padding) is zero.
Params init_params(const ModelDims& dims, std::uint64_t seed, double embed_scale = 0.05);

/// Embedded inputs, one column per token (embed x L).
Mat embed(const Params& params, const TokenSequence& seq);

struct Forward {
  double p = 0.5;
  double logit = 0.0;
  std::optional<Cache> cache;
};

/// p = sigmoid(w_out . h_{L-1} + b_out) after running all L timesteps from
/// the zero state.
Forward forward_classify(const Params& params, const TokenSequence& seq, bool keep_cache);

inline constexpr double kProbClamp = 1e-12;

/// -[y ln p + (1 - y) ln(1 - p)] with p clamped to [1e-12, 1 - 1e-12].
double bce_loss(double p, int y);

/// Exact gradient of bce_loss(forward_classify(seq)) with respect to every
/// parameter. `fwd` must come from forward_classify(..., keep_cache=true).
Params backward(const Params& params, const TokenSequence& seq, const Forward& fwd);

/// Bias-corrected Adam; increments step_count.
void adam_step(AdamState& adam, Params& params, const Params& grads);

struct EpochStats {
  double mean_loss = 0.0;
  std::int64_t updates = 0;
};

/// One pass over `train_set` in an order drawn from (seed, epoch). Gradients
/// are averaged per batch with a fixed-order reduction, so results do not
/// depend on `threads`.
EpochStats train_epoch(Params& params, AdamState& adam, std::span<const TokenSequence> train_set,
                       std::int32_t batch_size, std::uint64_t seed, std::int64_t epoch,
                       unsigned threads = 1);

struct EvalResult {
  double test_loss = 0.0;
  double accuracy = 0.0;
  std::vector<std::int64_t> wrong_indices;
  double wrong_loss = 0.0;
  std::int64_t n_wrong = 0;
  std::vector<double> probabilities;
};

/// Prediction is positive iff p >= 0.5. wrong_loss is the mean BCE over the
/// misclassified reviews, 0 when there are none.
EvalResult evaluate(const Params& params, std::span<const TokenSequence> test_set,
                    unsigned threads = 1);

/// Same reduction as evaluate() from precomputed probabilities.
EvalResult summarize_predictions(std::span<const double> probabilities, std::span<const int> labels);

/// Worst coordinate-wise relative error between backward() and central
/// differences; denominators floored at 1e-8.
double grad_check(const Params& params, const TokenSequence& seq, double fd_step = 1e-5);

/// As grad_check but against a caller-supplied analytic gradient.
double compare_with_finite_differences(const Params& params, const TokenSequence& seq,
                                       const Params& analytic, double fd_step);

}  // namespace eoc::train
