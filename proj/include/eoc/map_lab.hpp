// The one-dimensional tanh map k -> r k (1 - tanh k): iteration, twin-run
// asymptotic distance, Lyapunov exponent, and parameter scans.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "eoc/error.hpp"

namespace eoc::map {

struct MapConfig {
  double r = 0.0;
  int k0_seeds = 500;
  /// Iterations before the twin trajectories are split.
  int burn_in = 3000;
  /// Total iterations; the last (n_iter - burn_in) are observed.
  int n_iter = 4000;
  double epsilon = 1e-5;
  double floor_ln = -15.0;
  std::uint64_t master_seed = 1;
  /// Worker threads for scans; 0 = hardware concurrency.
  unsigned threads = 0;
  /// Scan points with mean log distance at or below this are ordered.
  double order_threshold = -14.0;

  void validate() const;
};

/// 1 - tanh k written as 2 / (e^{2k} + 1), which keeps full relative
/// precision for large k.
template <typename Scalar>
Scalar one_minus_tanh(Scalar k) {
  return Scalar(2) / (std::exp(Scalar(2) * k) + Scalar(1));
}

template <typename Scalar>
Scalar tanh_map_step(Scalar k, Scalar r) {
  if (!std::isfinite(k)) {
    throw NonFiniteError("tanh_map_step: input is not finite", 0);
  }
  return r * k * one_minus_tanh(k);
}

/// f'(k) = r (1 - tanh k - k sech^2 k) = r s (1 - k (2 - s)) with s = 1 - tanh k.
template <typename Scalar>
Scalar tanh_map_derivative(Scalar k, Scalar r) {
  const Scalar s = one_minus_tanh(k);
  return r * s * (Scalar(1) - k * (Scalar(2) - s));
}

std::vector<double> iterate_map(double k0, double r, const MapConfig& cfg);

/// Runs k0 through burn_in steps, splits into (k, k + epsilon) and iterates
/// both for the remaining steps. Returns ln(|k - k'| + exp(floor_ln)).
double map_asymptotic_distance(double k0, double r, const MapConfig& cfg);

/// Mean of ln|f'(k_t)| over the post-burn-in iterates; each log argument is
/// floored at exp(floor_ln).
double lyapunov_exponent(double k0, double r, const MapConfig& cfg);

struct SeedSample {
  double ln_distance = 0.0;
  double lyapunov = 0.0;
  double asymptote = 0.0;
};

/// All three observables from one pass over a single seed.
SeedSample sample_seed(double k0, double r, const MapConfig& cfg);

/// Initial value for seed `seed_index`, uniform on (0, 1]. Depends only on
/// (master_seed, seed_index), never on r.
double initial_value(std::uint64_t master_seed, int seed_index);

struct MapScanRecord {
  double r = 0.0;
  double mean_ln_distance = 0.0;
  double lyapunov = 0.0;
  std::vector<double> asymptotes;
  std::vector<SeedSample> per_seed;

  bool ordered(double order_threshold) const { return mean_ln_distance <= order_threshold; }
};

/// Evenly spaced grid with both endpoints exact.
std::vector<double> linear_grid(double lo, double hi, int n);

MapScanRecord scan_point(double r, const MapConfig& cfg);

std::vector<MapScanRecord> bifurcation_scan(double r_min, double r_max, int n_r,
                                            const MapConfig& cfg);

struct AliasingReport {
  std::vector<MapScanRecord> low;
  std::vector<MapScanRecord> high;
  std::vector<double> low_ordered;
  std::vector<double> high_ordered;
};

AliasingReport aliasing_demo(const MapConfig& cfg, double r_min = 10.5, double r_max = 11.0,
                             int low_n = 50, int high_n = 281);

/// One row per (r, seed): r, seed_index, ln_distance, lyapunov, asymptote.
void write_scan_csv(const std::string& path, const std::vector<MapScanRecord>& scan);

}  // namespace eoc::map
