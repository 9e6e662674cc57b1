#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "eoc/csv.hpp"
#include "eoc/map_lab.hpp"
#include "oracles.hpp"

namespace m = eoc::map;

namespace {

m::MapConfig small_cfg() {
  m::MapConfig c;
  c.k0_seeds = 20;
  c.threads = 1;
  return c;
}

}  // namespace

TEST_CASE("single map step") {
  CHECK(m::tanh_map_step(1.0, 1.0) == doctest::Approx(0.2384058).epsilon(1e-7));
  CHECK(m::tanh_map_step(0.0, 7.0) == 0.0);
  CHECK(m::tanh_map_step(1.0f, 2.0f) == doctest::Approx(2.0 * (1.0 - std::tanh(1.0))).epsilon(1e-6));
  CHECK_THROWS_AS(m::tanh_map_step(std::nan(""), 1.0), eoc::NonFiniteError);
}

TEST_CASE("derivative matches central differences") {
  for (const double r : {0.5, 2.0, 9.5}) {
    for (const double k : {-1.0, 0.1, 0.7, 2.5}) {
      const double h = 1e-6;
      const double fd = (m::tanh_map_step(k + h, r) - m::tanh_map_step(k - h, r)) / (2 * h);
      CHECK(m::tanh_map_derivative(k, r) == doctest::Approx(fd).epsilon(1e-7));
    }
  }
}

TEST_CASE("r below one contracts to zero") {
  auto cfg = small_cfg();
  const auto tail = m::iterate_map(0.8, 0.5, cfg);
  REQUIRE(tail.size() == static_cast<std::size_t>(cfg.n_iter - cfg.burn_in));
  CHECK(std::abs(tail.back()) < 1e-12);
  CHECK(m::lyapunov_exponent(0.8, 0.5, cfg) == doctest::Approx(std::log(0.5)).epsilon(1e-9));
  CHECK(m::map_asymptotic_distance(0.8, 0.5, cfg) == doctest::Approx(-15.0).epsilon(1e-12));
}

TEST_CASE("r = 2 settles on the bisection fixed point") {
  const double kstar = oracle::tanh_map_fixed_point(2.0);
  CHECK(kstar == doctest::Approx(0.5493061).epsilon(1e-7));
  auto cfg = small_cfg();
  const auto tail = m::iterate_map(0.3, 2.0, cfg);
  CHECK(tail.back() == doctest::Approx(kstar).epsilon(1e-12));
  const double expected_lyap = std::log(std::abs(2.0 * (1.0 - std::tanh(kstar) -
                                                         kstar / std::pow(std::cosh(kstar), 2))));
  CHECK(expected_lyap < 0.0);
  CHECK(m::lyapunov_exponent(0.3, 2.0, cfg) == doctest::Approx(expected_lyap).epsilon(1e-9));
  CHECK(m::map_asymptotic_distance(0.3, 2.0, cfg) <= -14.0);
}

TEST_CASE("chaotic regime separates twin trajectories") {
  auto cfg = small_cfg();
  CHECK(m::lyapunov_exponent(0.3, 9.5, cfg) > 0.0);
  CHECK(m::map_asymptotic_distance(0.3, 9.6, cfg) > -5.0);
  CHECK(m::lyapunov_exponent(0.3, 9.6, cfg) > 0.05);
}

TEST_CASE("identical twins sit exactly at the floor") {
  auto cfg = small_cfg();
  cfg.epsilon = 1e-300;
  CHECK(m::map_asymptotic_distance(0.3, 9.6, cfg) == doctest::Approx(-15.0).epsilon(1e-14));
  cfg.floor_ln = -20.0;
  CHECK(m::map_asymptotic_distance(0.3, 9.6, cfg) == doctest::Approx(-20.0).epsilon(1e-14));
}

TEST_CASE("configuration errors") {
  auto cfg = small_cfg();
  CHECK_THROWS_AS(m::iterate_map(0.3, -1.0, cfg), eoc::ConfigError);
  cfg.n_iter = cfg.burn_in;
  CHECK_THROWS_AS(m::iterate_map(0.3, 2.0, cfg), eoc::ConfigError);
  CHECK_THROWS_AS(m::iterate_map(INFINITY, 2.0, small_cfg()), eoc::NonFiniteError);
  CHECK_THROWS_AS(m::linear_grid(1.0, 1.0, 5), eoc::ConfigError);
  CHECK_THROWS_AS(m::linear_grid(0.0, 1.0, 1), eoc::ConfigError);
}

TEST_CASE("initial values are in (0, 1] and keyed by seed index only") {
  for (int s = 0; s < 200; ++s) {
    const double k0 = m::initial_value(1, s);
    CHECK(k0 > 0.0);
    CHECK(k0 <= 1.0);
    CHECK(k0 == m::initial_value(1, s));
  }
  CHECK(m::initial_value(1, 0) != m::initial_value(2, 0));
}

TEST_CASE("linear grid has exact endpoints and even spacing") {
  const auto g = m::linear_grid(10.5, 11.0, 281);
  REQUIRE(g.size() == 281);
  CHECK(g.front() == 10.5);
  CHECK(g.back() == 11.0);
  for (std::size_t k = 1; k < g.size(); ++k) {
    CHECK(g[k] - g[k - 1] == doctest::Approx(0.5 / 280).epsilon(1e-9));
  }
}

TEST_CASE("scan over the contracting range stays at the floor") {
  auto cfg = small_cfg();
  const auto scan = m::bifurcation_scan(0.0, 0.99, 11, cfg);
  REQUIRE(scan.size() == 11);
  for (const auto& rec : scan) {
    CHECK(std::abs(rec.mean_ln_distance + 15.0) <= 0.1);
    CHECK(rec.ordered(cfg.order_threshold));
    CHECK(rec.per_seed.size() == 20);
  }
}

TEST_CASE("scan records agree in sign between distance and Lyapunov exponent") {
  auto cfg = small_cfg();
  const auto scan = m::bifurcation_scan(0.5, 12.0, 47, cfg);
  for (const auto& rec : scan) {
    for (const auto& s : rec.per_seed) {
      if (s.ln_distance > -5.0) {
        CHECK(s.lyapunov > 0.0);
      }
      if (s.lyapunov < -0.05) {
        CHECK(s.ln_distance <= -14.0);
      }
    }
  }
}

TEST_CASE("shared grid points give identical records across resolutions and thread counts") {
  auto cfg = small_cfg();
  const auto low = m::bifurcation_scan(10.5, 11.0, 3, cfg);
  cfg.threads = 4;
  const auto high = m::bifurcation_scan(10.5, 11.0, 5, cfg);
  for (const auto& [lo, hi] : {std::pair{0, 0}, std::pair{1, 2}, std::pair{2, 4}}) {
    REQUIRE(low[lo].r == high[hi].r);
    CHECK(low[lo].mean_ln_distance == high[hi].mean_ln_distance);
    CHECK(low[lo].lyapunov == high[hi].lyapunov);
    CHECK(low[lo].asymptotes == high[hi].asymptotes);
  }
}

TEST_CASE("scan CSV has one row per seed") {
  auto cfg = small_cfg();
  cfg.k0_seeds = 3;
  const auto scan = m::bifurcation_scan(1.0, 3.0, 4, cfg);
  const auto path = (std::filesystem::temp_directory_path() / "eoc_scan_test.csv").string();
  m::write_scan_csv(path, scan);
  const auto t = eoc::csv::read(path);
  CHECK(t.header == std::vector<std::string>{"r", "seed_index", "ln_distance", "lyapunov", "asymptote"});
  REQUIRE(t.rows.size() == 12);
  CHECK(eoc::csv::parse_number(t.rows[4][t.column("ln_distance")]) == scan[1].per_seed[1].ln_distance);
  std::filesystem::remove(path);
}
