// Asymptotic stability probe: twin trajectories through a review followed by
// autonomous (zero-input) iteration, compared at the final timestep.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "eoc/corpus.hpp"
#include "eoc/lstm.hpp"

namespace eoc::probe {

struct ProbeConfig {
  double sigma = 1e-5;
  /// Total timesteps including the review prefix.
  std::int32_t t_total = 480;
  /// Real-input prefix length (the encoded review length).
  std::int32_t l_real = 60;
  double floor_ln = -15.0;
  std::int32_t n_samples = 100;
  std::uint64_t master_seed = 1;
  unsigned threads = 1;

  void validate() const;
};

struct ProbeOutcome {
  std::int64_t review_index = 0;
  double distance = 0.0;
  double distance_floored = 0.0;
  double reduced_sum = 0.0;
  double reduced_sum_perturbed = 0.0;
};

struct EpochProbe {
  std::int64_t epoch = 0;
  double dtilde = 0.0;
  std::vector<ProbeOutcome> outcomes;
  std::vector<double> reduced_sums;
  std::vector<double> normalized_reduced_sums;
};

/// I.i.d. N(0, sigma^2) components from the counter-based stream keyed by
/// `seed` via Box–Muller.
Vec sample_perturbation(std::int64_t dim, double sigma, std::uint64_t seed,
                        std::uint64_t index = 0);

/// Perturbation used for review `review_index` in every epoch of a run.
Vec review_perturbation(const ProbeConfig& cfg, std::int64_t dim, std::int64_t review_index);

double reduced_sum(const Vec& h);

/// Run A from (h, c) = (0, 0), run B from (perturbation, 0); both consume
/// l_real embedded tokens then zero vectors up to t_total steps. The distance
/// is the Euclidean norm between the final hidden vectors.
ProbeOutcome probe_review(const Params& params, const corpus::TokenSequence& seq,
                          const Vec& perturbation, const ProbeConfig& cfg,
                          std::int64_t review_index = 0);

/// Mean of ln(D + exp(floor_ln)).
double mean_log_distance(std::span<const double> distances, double floor_ln);

/// ln of the geometric mean of the floored distances, evaluated as a
/// product of mantissas and a running exponent (never overflows).
double log_geometric_mean(std::span<const double> distances, double floor_ln);

/// Probes every sequence of the fixed probe set; reduction in index order.
EpochProbe probe_epoch(const Params& params, std::span<const corpus::TokenSequence> probe_set,
                       const ProbeConfig& cfg, std::int64_t epoch = 0);

struct ClusterSummary {
  std::int64_t clusters = 0;
  double max_width = 0.0;
};

/// Groups sorted values into clusters separated by gaps larger than `gap`.
ClusterSummary cluster_values(std::span<const double> values, double gap);

double standard_deviation(std::span<const double> values);

}  // namespace eoc::probe
