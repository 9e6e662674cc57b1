#include "eoc/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eoc/error.hpp"
#include "eoc/parallel.hpp"
#include "eoc/random.hpp"

namespace eoc::probe {

void ProbeConfig::validate() const {
  if (l_real < 1 || t_total <= l_real) {
    throw ConfigError("probe: need t_total > l_real >= 1");
  }
  if (!(sigma > 0.0)) {
    throw ConfigError("probe: sigma must be > 0");
  }
  if (!(std::exp(floor_ln) > 0.0)) {
    throw ConfigError("probe: exp(floor_ln) underflows to zero");
  }
  if (n_samples < 1) {
    throw ConfigError("probe: n_samples must be >= 1");
  }
}

Vec sample_perturbation(std::int64_t dim, double sigma, std::uint64_t seed, std::uint64_t index) {
  if (!(sigma > 0.0)) {
    throw ConfigError("sample_perturbation: sigma must be > 0");
  }
  RandomStream rng(seed, StreamTag::kPerturbation, index);
  Vec eps(dim);
  for (Eigen::Index k = 0; k < eps.size(); ++k) {
    eps[k] = sigma * rng.normal();
  }
  return eps;
}

Vec review_perturbation(const ProbeConfig& cfg, std::int64_t dim, std::int64_t review_index) {
  return sample_perturbation(dim, cfg.sigma, cfg.master_seed,
                             static_cast<std::uint64_t>(review_index));
}

double reduced_sum(const Vec& h) { return h.sum(); }

ProbeOutcome probe_review(const Params& params, const corpus::TokenSequence& seq,
                          const Vec& perturbation, const ProbeConfig& cfg,
                          std::int64_t review_index) {
  cfg.validate();
  const Eigen::Index n = params.W_hi.rows();
  if (perturbation.size() != n) {
    throw std::invalid_argument("probe_review: perturbation dimension differs from hidden_dim");
  }
  if (seq.ids.size() < static_cast<std::size_t>(cfg.l_real)) {
    throw std::invalid_argument("probe_review: sequence shorter than l_real");
  }
  const Eigen::Index e = params.W_xi.cols();
  Vec x(e);
  const Vec zero = Vec::Zero(e);
  Vec i(n), f(n), o(n), g(n), c_next(n), h_next(n);

  auto run = [&](Vec h, Vec c) {
    for (std::int32_t t = 0; t < cfg.t_total; ++t) {
      if (t < cfg.l_real) {
        const auto id = seq.ids[static_cast<std::size_t>(t)];
        if (id < 0 || id >= params.embedding.rows()) {
          throw std::invalid_argument("probe_review: token id out of range");
        }
        x = params.embedding.row(id).transpose();
        detail::step_into(params, x, h, c, i, f, o, g, c_next, h_next);
      } else {
        detail::step_into(params, zero, h, c, i, f, o, g, c_next, h_next);
      }
      if (!h_next.allFinite() || !c_next.allFinite()) {
        throw NonFiniteError("probe_review: state diverged", static_cast<std::size_t>(t));
      }
      h.swap(h_next);
      c.swap(c_next);
    }
    return h;
  };

  const Vec h_a = run(Vec::Zero(n), Vec::Zero(n));
  const Vec h_b = run(perturbation, Vec::Zero(n));

  ProbeOutcome out;
  out.review_index = review_index;
  out.distance = (h_b - h_a).norm();
  out.distance_floored = out.distance + std::exp(cfg.floor_ln);
  out.reduced_sum = reduced_sum(h_a);
  out.reduced_sum_perturbed = reduced_sum(h_b);
  return out;
}

double mean_log_distance(std::span<const double> distances, double floor_ln) {
  if (distances.empty()) {
    throw InsufficientDataError("mean_log_distance: no samples");
  }
  const double floor_value = std::exp(floor_ln);
  double sum = 0.0;
  for (const double d : distances) {
    sum += std::log(d + floor_value);
  }
  return sum / static_cast<double>(distances.size());
}

double log_geometric_mean(std::span<const double> distances, double floor_ln) {
  if (distances.empty()) {
    throw InsufficientDataError("log_geometric_mean: no samples");
  }
  const double floor_value = std::exp(floor_ln);
  double mantissa = 1.0;
  long exponent = 0;
  for (const double d : distances) {
    int e = 0;
    mantissa *= std::frexp(d + floor_value, &e);
    exponent += e;
    int renorm = 0;
    mantissa = std::frexp(mantissa, &renorm);
    exponent += renorm;
  }
  const double n = static_cast<double>(distances.size());
  return (std::log(mantissa) + static_cast<double>(exponent) * std::numbers::ln2) / n;
}

EpochProbe probe_epoch(const Params& params, std::span<const corpus::TokenSequence> probe_set,
                       const ProbeConfig& cfg, std::int64_t epoch) {
  cfg.validate();
  if (probe_set.empty()) {
    throw ConfigError("probe_epoch: empty probe set");
  }
  EpochProbe ep;
  ep.epoch = epoch;
  ep.outcomes.resize(probe_set.size());
  const std::int64_t hidden = params.W_hi.rows();
  parallel_for(probe_set.size(), cfg.threads, [&](std::size_t k) {
    const auto idx = static_cast<std::int64_t>(k);
    ep.outcomes[k] = probe_review(params, probe_set[k], review_perturbation(cfg, hidden, idx), cfg, idx);
  });

  std::vector<double> distances;
  distances.reserve(ep.outcomes.size());
  ep.reduced_sums.reserve(ep.outcomes.size());
  for (const auto& o : ep.outcomes) {
    distances.push_back(o.distance);
    ep.reduced_sums.push_back(o.reduced_sum);
  }
  ep.dtilde = mean_log_distance(distances, cfg.floor_ln);

  double mean = 0.0;
  for (const double s : ep.reduced_sums) {
    mean += s;
  }
  mean /= static_cast<double>(ep.reduced_sums.size());
  ep.normalized_reduced_sums.reserve(ep.reduced_sums.size());
  for (const double s : ep.reduced_sums) {
    ep.normalized_reduced_sums.push_back(s - mean);
  }
  return ep;
}

ClusterSummary cluster_values(std::span<const double> values, double gap) {
  ClusterSummary out;
  if (values.empty()) {
    return out;
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double start = sorted.front();
  out.clusters = 1;
  for (std::size_t k = 1; k < sorted.size(); ++k) {
    if (sorted[k] - sorted[k - 1] > gap) {
      out.max_width = std::max(out.max_width, sorted[k - 1] - start);
      start = sorted[k];
      ++out.clusters;
    }
  }
  out.max_width = std::max(out.max_width, sorted.back() - start);
  return out;
}

double standard_deviation(std::span<const double> values) {
  if (values.empty()) {
    return 0.0;
  }
  double mean = 0.0;
  for (const double v : values) {
    mean += v;
  }
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (const double v : values) {
    ss += (v - mean) * (v - mean);
  }
  return std::sqrt(ss / static_cast<double>(values.size()));
}

}  // namespace eoc::probe
