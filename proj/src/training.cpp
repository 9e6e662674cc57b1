#include "eoc/training.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "eoc/error.hpp"
#include "eoc/parallel.hpp"
#include "eoc/random.hpp"

namespace eoc::train {

AdamState AdamState::for_params(const Params& params, double lr) {
  AdamState a;
  a.m = Params::zeros(params.dims());
  a.v = Params::zeros(params.dims());
  a.lr = lr;
  return a;
}

Params init_params(const ModelDims& dims, std::uint64_t seed, double embed_scale) {
  if (dims.vocab < 2 || dims.embed < 1 || dims.hidden < 1) {
    throw ConfigError("init_params: need vocab >= 2, embed >= 1, hidden >= 1");
  }
  Params p(dims);
  RandomStream rng(seed, StreamTag::kInit);
  const double s = 1.0 / std::sqrt(static_cast<double>(dims.hidden));
  auto fill = [&](auto& m, double scale) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        m(r, c) = rng.uniform(-scale, scale);
      }
    }
  };
  for (Mat* m : {&p.W_xi, &p.W_xf, &p.W_xo, &p.W_xc, &p.W_hi, &p.W_hf, &p.W_ho, &p.W_hc}) {
    fill(*m, s);
  }
  fill(p.w_out, s);
  fill(p.embedding, embed_scale);
  p.embedding.row(corpus::kPadId).setZero();
  return p;
}

Mat embed(const Params& params, const TokenSequence& seq) {
  if (seq.ids.empty()) {
    throw std::invalid_argument("embed: empty token sequence");
  }
  Mat x(params.embedding.cols(), static_cast<Eigen::Index>(seq.ids.size()));
  for (std::size_t t = 0; t < seq.ids.size(); ++t) {
    const auto id = seq.ids[t];
    if (id < 0 || id >= params.embedding.rows()) {
      throw std::invalid_argument("embed: token id " + std::to_string(id) + " out of range");
    }
    x.col(static_cast<Eigen::Index>(t)) = params.embedding.row(id).transpose();
  }
  return x;
}

Forward forward_classify(const Params& params, const TokenSequence& seq, bool keep_cache) {
  auto run = run_sequence(params, embed(params, seq), State::zeros(params.W_hi.rows()), keep_cache);
  Forward f;
  f.logit = params.w_out.dot(run.final.h) + params.b_out;
  f.p = sigmoid(f.logit);
  f.cache = std::move(run.cache);
  return f;
}

double bce_loss(double p, int y) {
  const double q = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return y == 1 ? -std::log(q) : -std::log(1.0 - q);
}

Params backward(const Params& params, const TokenSequence& seq, const Forward& fwd) {
  if (!fwd.cache) {
    throw std::invalid_argument("backward: forward pass was run without a cache");
  }
  const Cache& cache = *fwd.cache;
  const Eigen::Index steps = cache.steps();
  const Eigen::Index n = params.W_hi.rows();
  Params g = Params::zeros(params.dims());

  const double dlogit = fwd.p - static_cast<double>(seq.label);
  g.w_out = dlogit * cache.h.col(steps - 1);
  g.b_out = dlogit;

  Vec dh = dlogit * params.w_out;
  Vec dc = Vec::Zero(n);
  Vec tanh_c(n), da_i(n), da_f(n), da_o(n), da_g(n), dx(params.W_xi.cols());
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    const auto i = cache.i.col(t).array();
    const auto f = cache.f.col(t).array();
    const auto o = cache.o.col(t).array();
    const auto gc = cache.g.col(t).array();
    const Vec& c_prev_src = t > 0 ? Vec(cache.c.col(t - 1)) : cache.init.c;
    const Vec& h_prev = t > 0 ? Vec(cache.h.col(t - 1)) : cache.init.h;
    tanh_c = cache.c.col(t).array().tanh().matrix();

    da_o = (dh.array() * tanh_c.array() * o * (1.0 - o)).matrix();
    dc.array() += dh.array() * o * (1.0 - tanh_c.array().square());
    da_i = (dc.array() * gc * i * (1.0 - i)).matrix();
    da_g = (dc.array() * i * (1.0 - gc.square())).matrix();
    da_f = (dc.array() * c_prev_src.array() * f * (1.0 - f)).matrix();

    const auto x = cache.x.col(t);
    g.W_xi.noalias() += da_i * x.transpose();
    g.W_xf.noalias() += da_f * x.transpose();
    g.W_xo.noalias() += da_o * x.transpose();
    g.W_xc.noalias() += da_g * x.transpose();
    g.W_hi.noalias() += da_i * h_prev.transpose();
    g.W_hf.noalias() += da_f * h_prev.transpose();
    g.W_ho.noalias() += da_o * h_prev.transpose();
    g.W_hc.noalias() += da_g * h_prev.transpose();
    g.b_i += da_i;
    g.b_f += da_f;
    g.b_o += da_o;
    g.b_c += da_g;

    const auto id = seq.ids[static_cast<std::size_t>(t)];
    if (id != corpus::kPadId) {
      dx.noalias() = params.W_xi.transpose() * da_i;
      dx.noalias() += params.W_xf.transpose() * da_f;
      dx.noalias() += params.W_xo.transpose() * da_o;
      dx.noalias() += params.W_xc.transpose() * da_g;
      g.embedding.row(id) += dx.transpose();
    }

    dc = (dc.array() * f).matrix();
    dh.noalias() = params.W_hi.transpose() * da_i;
    dh.noalias() += params.W_hf.transpose() * da_f;
    dh.noalias() += params.W_ho.transpose() * da_o;
    dh.noalias() += params.W_hc.transpose() * da_g;
  }
  return g;
}

void adam_step(AdamState& adam, Params& params, const Params& grads) {
  if (!(adam.m.dims() == params.dims()) || !(grads.dims() == params.dims())) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  ++adam.step_count;
  const double t = static_cast<double>(adam.step_count);
  const double bias1 = 1.0 - std::pow(adam.beta1, t);
  const double bias2 = 1.0 - std::pow(adam.beta2, t);
  const double b1 = adam.beta1;
  const double b2 = adam.beta2;
  const double lr = adam.lr;
  const double eps = adam.eps;

  // Walk the four tensor lists in lockstep.
  std::vector<Eigen::Map<Mat>> ps, ms, vs;
  std::vector<Eigen::Map<const Mat>> gs;
  params.for_each_tensor([&](std::string_view, Eigen::Map<Mat> t) { ps.push_back(t); });
  adam.m.for_each_tensor([&](std::string_view, Eigen::Map<Mat> t) { ms.push_back(t); });
  adam.v.for_each_tensor([&](std::string_view, Eigen::Map<Mat> t) { vs.push_back(t); });
  grads.for_each_tensor([&](std::string_view, Eigen::Map<const Mat> t) { gs.push_back(t); });
  for (std::size_t k = 0; k < ps.size(); ++k) {
    auto m = ms[k].array();
    auto v = vs[k].array();
    const auto g = gs[k].array();
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.square();
    ps[k].array() -= lr * (m / bias1) / ((v / bias2).sqrt() + eps);
  }
}

namespace {

void accumulate(Params& into, const Params& g) {
  std::vector<Eigen::Map<Mat>> dst;
  into.for_each_tensor([&](std::string_view, Eigen::Map<Mat> t) { dst.push_back(t); });
  std::size_t k = 0;
  g.for_each_tensor([&](std::string_view, Eigen::Map<const Mat> t) { dst[k++] += t; });
}

void scale(Params& p, double s) {
  p.for_each_tensor([&](std::string_view, Eigen::Map<Mat> t) { t *= s; });
}

}  // namespace

EpochStats train_epoch(Params& params, AdamState& adam, std::span<const TokenSequence> train_set,
                       std::int32_t batch_size, std::uint64_t seed, std::int64_t epoch,
                       unsigned threads) {
  if (train_set.empty()) {
    throw ConfigError("train_epoch: empty training set");
  }
  if (batch_size < 1) {
    throw ConfigError("train_epoch: batch_size must be >= 1");
  }
  RandomStream rng(seed, StreamTag::kShuffle, static_cast<std::uint64_t>(epoch));
  const auto order = seeded_permutation(train_set.size(), rng);

  EpochStats stats;
  double loss_sum = 0.0;
  const auto batch = static_cast<std::size_t>(batch_size);
  std::vector<Params> grads(std::min(batch, train_set.size()));
  std::vector<double> losses(grads.size());
  for (std::size_t start = 0; start < order.size(); start += batch) {
    const std::size_t count = std::min(batch, order.size() - start);
    parallel_for(count, threads, [&](std::size_t j) {
      const TokenSequence& seq = train_set[order[start + j]];
      const Forward fwd = forward_classify(params, seq, true);
      losses[j] = bce_loss(fwd.p, seq.label);
      grads[j] = backward(params, seq, fwd);
    });
    Params total = std::move(grads[0]);
    loss_sum += losses[0];
    for (std::size_t j = 1; j < count; ++j) {
      accumulate(total, grads[j]);
      loss_sum += losses[j];
    }
    scale(total, 1.0 / static_cast<double>(count));
    adam_step(adam, params, total);
    ++stats.updates;
  }
  stats.mean_loss = loss_sum / static_cast<double>(train_set.size());
  return stats;
}

EvalResult summarize_predictions(std::span<const double> probabilities, std::span<const int> labels) {
  if (probabilities.empty() || probabilities.size() != labels.size()) {
    throw ConfigError("evaluate: need a non-empty set with one label per prediction");
  }
  EvalResult r;
  r.probabilities.assign(probabilities.begin(), probabilities.end());
  double loss_sum = 0.0;
  double wrong_sum = 0.0;
  std::int64_t correct = 0;
  for (std::size_t k = 0; k < probabilities.size(); ++k) {
    const double loss = bce_loss(probabilities[k], labels[k]);
    loss_sum += loss;
    const int predicted = probabilities[k] >= 0.5 ? 1 : 0;
    if (predicted == labels[k]) {
      ++correct;
    } else {
      r.wrong_indices.push_back(static_cast<std::int64_t>(k));
      wrong_sum += loss;
    }
  }
  const auto n = static_cast<double>(probabilities.size());
  r.test_loss = loss_sum / n;
  r.accuracy = static_cast<double>(correct) / n;
  r.n_wrong = static_cast<std::int64_t>(r.wrong_indices.size());
  r.wrong_loss = r.n_wrong > 0 ? wrong_sum / static_cast<double>(r.n_wrong) : 0.0;
  return r;
}

EvalResult evaluate(const Params& params, std::span<const TokenSequence> test_set, unsigned threads) {
  if (test_set.empty()) {
    throw ConfigError("evaluate: empty test set");
  }
  std::vector<double> p(test_set.size());
  std::vector<int> labels(test_set.size());
  parallel_for(test_set.size(), threads, [&](std::size_t k) {
    p[k] = forward_classify(params, test_set[k], false).p;
    labels[k] = test_set[k].label;
  });
  return summarize_predictions(p, labels);
}

double compare_with_finite_differences(const Params& params, const TokenSequence& seq,
                                       const Params& analytic, double fd_step) {
  if (params.parameter_count() > 5000) {
    throw ConfigError("grad_check: model too large (more than 5000 parameters)");
  }
  Params probe = params;
  auto loss_at = [&] { return bce_loss(forward_classify(probe, seq, false).p, seq.label); };

  std::vector<Eigen::Map<Mat>> coords;
  std::vector<Eigen::Map<const Mat>> grads;
  probe.for_each_tensor([&](std::string_view, Eigen::Map<Mat> t) { coords.push_back(t); });
  analytic.for_each_tensor([&](std::string_view, Eigen::Map<const Mat> t) { grads.push_back(t); });

  double worst = 0.0;
  for (std::size_t k = 0; k < coords.size(); ++k) {
    for (Eigen::Index e = 0; e < coords[k].size(); ++e) {
      // The padding row is frozen and carries no gradient by construction.
      if (k == 0 && e % coords[k].rows() == corpus::kPadId) {
        continue;
      }
      double& slot = coords[k].data()[e];
      const double saved = slot;
      slot = saved + fd_step;
      const double up = loss_at();
      slot = saved - fd_step;
      const double down = loss_at();
      slot = saved;
      const double numeric = (up - down) / (2.0 * fd_step);
      const double exact = grads[k].data()[e];
      const double denom = std::max({std::abs(numeric), std::abs(exact), 1e-8});
      worst = std::max(worst, std::abs(numeric - exact) / denom);
    }
  }
  return worst;
}

double grad_check(const Params& params, const TokenSequence& seq, double fd_step) {
  const Forward fwd = forward_classify(params, seq, true);
  return compare_with_finite_differences(params, seq, backward(params, seq, fwd), fd_step);
}

}  // namespace eoc::train
