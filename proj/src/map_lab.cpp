#include "eoc/map_lab.hpp"

#include <algorithm>
#include <numeric>

#include "eoc/csv.hpp"
#include "eoc/parallel.hpp"
#include "eoc/random.hpp"

namespace eoc::map {

void MapConfig::validate() const {
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw ConfigError("map: r must be finite and >= 0");
  }
  if (burn_in < 0 || n_iter <= burn_in) {
    throw ConfigError("map: need n_iter > burn_in >= 0");
  }
  if (!(epsilon > 0.0)) {
    throw ConfigError("map: epsilon must be > 0");
  }
  if (k0_seeds < 1) {
    throw ConfigError("map: k0_seeds must be >= 1");
  }
}

namespace {

MapConfig with_r(const MapConfig& cfg, double r) {
  MapConfig c = cfg;
  c.r = r;
  c.validate();
  return c;
}

double checked(double next, std::size_t step) {
  if (!std::isfinite(next)) {
    throw NonFiniteError("tanh map diverged", step);
  }
  return next;
}

}  // namespace

std::vector<double> iterate_map(double k0, double r, const MapConfig& cfg) {
  with_r(cfg, r);
  if (!std::isfinite(k0)) {
    throw NonFiniteError("iterate_map: k0 is not finite", 0);
  }
  std::vector<double> tail;
  tail.reserve(static_cast<std::size_t>(cfg.n_iter - cfg.burn_in));
  double k = k0;
  for (int t = 1; t <= cfg.n_iter; ++t) {
    k = checked(r * k * one_minus_tanh(k), static_cast<std::size_t>(t));
    if (t > cfg.burn_in) {
      tail.push_back(k);
    }
  }
  return tail;
}

SeedSample sample_seed(double k0, double r, const MapConfig& cfg) {
  with_r(cfg, r);
  if (!std::isfinite(k0)) {
    throw NonFiniteError("tanh map: k0 is not finite", 0);
  }
  const double floor_value = std::exp(cfg.floor_ln);
  double k = k0;
  int t = 0;
  for (; t < cfg.burn_in; ++t) {
    k = checked(r * k * one_minus_tanh(k), static_cast<std::size_t>(t + 1));
  }
  double twin = k + cfg.epsilon;
  double log_derivative_sum = 0.0;
  for (; t < cfg.n_iter; ++t) {
    const double s = one_minus_tanh(k);
    const double derivative = r * s * (1.0 - k * (2.0 - s));
    log_derivative_sum += std::log(std::max(std::abs(derivative), floor_value));
    k = checked(r * k * s, static_cast<std::size_t>(t + 1));
    twin = checked(r * twin * one_minus_tanh(twin), static_cast<std::size_t>(t + 1));
  }
  SeedSample s;
  s.ln_distance = std::log(std::abs(k - twin) + floor_value);
  s.lyapunov = log_derivative_sum / static_cast<double>(cfg.n_iter - cfg.burn_in);
  s.asymptote = k;
  return s;
}

double map_asymptotic_distance(double k0, double r, const MapConfig& cfg) {
  return sample_seed(k0, r, cfg).ln_distance;
}

double lyapunov_exponent(double k0, double r, const MapConfig& cfg) {
  return sample_seed(k0, r, cfg).lyapunov;
}

double initial_value(std::uint64_t master_seed, int seed_index) {
  RandomStream rng(master_seed, StreamTag::kMapSeeds, static_cast<std::uint64_t>(seed_index));
  return rng.uniform_open_closed();
}

std::vector<double> linear_grid(double lo, double hi, int n) {
  if (!(lo < hi) || n < 2) {
    throw ConfigError("grid: need lo < hi and n >= 2");
  }
  std::vector<double> grid(static_cast<std::size_t>(n));
  const double span = hi - lo;
  for (int i = 0; i < n; ++i) {
    grid[static_cast<std::size_t>(i)] = lo + span * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

MapScanRecord scan_point(double r, const MapConfig& cfg) {
  with_r(cfg, r);
  MapScanRecord rec;
  rec.r = r;
  rec.per_seed.reserve(static_cast<std::size_t>(cfg.k0_seeds));
  rec.asymptotes.reserve(static_cast<std::size_t>(cfg.k0_seeds));
  double dist_sum = 0.0;
  double lyap_sum = 0.0;
  for (int s = 0; s < cfg.k0_seeds; ++s) {
    const SeedSample sample = sample_seed(initial_value(cfg.master_seed, s), r, cfg);
    dist_sum += sample.ln_distance;
    lyap_sum += sample.lyapunov;
    rec.asymptotes.push_back(sample.asymptote);
    rec.per_seed.push_back(sample);
  }
  rec.mean_ln_distance = dist_sum / cfg.k0_seeds;
  rec.lyapunov = lyap_sum / cfg.k0_seeds;
  return rec;
}

std::vector<MapScanRecord> bifurcation_scan(double r_min, double r_max, int n_r,
                                            const MapConfig& cfg) {
  if (!(r_min >= 0.0)) {
    throw ConfigError("bifurcation_scan: r_min must be >= 0");
  }
  const std::vector<double> grid = linear_grid(r_min, r_max, n_r);
  std::vector<MapScanRecord> out(grid.size());
  parallel_for(grid.size(), cfg.threads, [&](std::size_t i) { out[i] = scan_point(grid[i], cfg); });
  return out;
}

AliasingReport aliasing_demo(const MapConfig& cfg, double r_min, double r_max, int low_n,
                             int high_n) {
  if (low_n >= high_n) {
    throw ConfigError("aliasing_demo: low_n must be < high_n");
  }
  AliasingReport report;
  report.low = bifurcation_scan(r_min, r_max, low_n, cfg);
  report.high = bifurcation_scan(r_min, r_max, high_n, cfg);
  for (const auto& rec : report.low) {
    if (rec.ordered(cfg.order_threshold)) {
      report.low_ordered.push_back(rec.r);
    }
  }
  for (const auto& rec : report.high) {
    if (rec.ordered(cfg.order_threshold)) {
      report.high_ordered.push_back(rec.r);
    }
  }
  return report;
}

void write_scan_csv(const std::string& path, const std::vector<MapScanRecord>& scan) {
  csv::Writer w(path, {"r", "seed_index", "ln_distance", "lyapunov", "asymptote"});
  for (const auto& rec : scan) {
    for (std::size_t s = 0; s < rec.per_seed.size(); ++s) {
      const SeedSample& sample = rec.per_seed[s];
      w.cell(rec.r)
          .cell(static_cast<std::int64_t>(s))
          .cell(sample.ln_distance)
          .cell(sample.lyapunov)
          .cell(sample.asymptote);
      w.end_row();
    }
  }
  w.flush();
}

}  // namespace eoc::map
