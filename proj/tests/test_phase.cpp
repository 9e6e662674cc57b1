#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "eoc/error.hpp"
#include "eoc/phase.hpp"
#include "eoc/random.hpp"

namespace ph = eoc::phase;
using ph::Direction;
using ph::EpochRecord;
using ph::EventKind;
using ph::Phase;

namespace {

std::vector<EpochRecord> from_dtilde(const std::vector<double>& d, double threshold = -14.0) {
  std::vector<EpochRecord> out;
  for (std::size_t k = 0; k < d.size(); ++k) {
    EpochRecord r;
    r.epoch = static_cast<std::int64_t>(k) + 1;
    r.dtilde = d[k];
    r.phase = ph::classify_phase(d[k], threshold);
    out.push_back(r);
  }
  return out;
}

std::vector<EpochRecord> from_loss(const std::vector<double>& loss) {
  std::vector<EpochRecord> out;
  for (std::size_t k = 0; k < loss.size(); ++k) {
    EpochRecord r;
    r.epoch = static_cast<std::int64_t>(k) + 1;
    r.test_loss = loss[k];
    out.push_back(r);
  }
  return out;
}

// Teeth that rise linearly from `base` to `peak` over `rise` epochs and
// then fall to `base` in one epoch.
std::vector<double> sawtooth(int teeth, int rise, double base, double peak) {
  std::vector<double> loss;
  for (int t = 0; t < teeth; ++t) {
    for (int k = 0; k <= rise; ++k) {
      loss.push_back(base + (peak - base) * k / rise);
    }
  }
  loss.push_back(base);
  return loss;
}

}  // namespace

TEST_CASE("phase classification") {
  CHECK(ph::classify_phase(-15.0) == Phase::kOrder);
  CHECK(ph::classify_phase(-2.0) == Phase::kChaos);
  CHECK(ph::classify_phase(-14.0) == Phase::kOrder);
  CHECK(ph::classify_phase(-13.999) == Phase::kChaos);
  for (double a = -15.0; a <= 0.0; a += 0.25) {
    for (double b = a; b <= 0.0; b += 0.25) {
      if (ph::classify_phase(b) == Phase::kOrder) {
        CHECK(ph::classify_phase(a) == Phase::kOrder);
      }
    }
  }
  CHECK(ph::phase_from_string(ph::to_string(Phase::kChaos)) == Phase::kChaos);
  CHECK(ph::phase_from_string("order") == Phase::kOrder);
  CHECK(ph::phase_from_string("unknown") == Phase::kUnknown);
}

TEST_CASE("transitions at label changes") {
  const auto s = from_dtilde({-15, -15, -3, -3, -15});
  const auto ev = ph::detect_transitions(s);
  REQUIRE(ev.size() == 2);
  CHECK(ev[0].epoch == 3);
  CHECK(ev[0].direction == Direction::kOrderToChaos);
  CHECK(ev[0].delta_dtilde == 12.0);
  CHECK(ev[1].epoch == 5);
  CHECK(ev[1].direction == Direction::kChaosToOrder);
  CHECK(ev[1].kind == EventKind::kPhase);
}

TEST_CASE("transition epochs counted from zero match the label-change example") {
  // Phases [O,O,C,C,O] indexed from 0 give events at 2 and 4.
  auto s = from_dtilde({-15, -15, -3, -3, -15});
  for (auto& r : s) r.epoch -= 1;
  const auto ev = ph::detect_transitions(s);
  REQUIRE(ev.size() == 2);
  CHECK(ev[0].epoch == 2);
  CHECK(ev[1].epoch == 4);
}

TEST_CASE("attractor drops without a label change") {
  auto s = from_dtilde({-3, -3, -9, -3});
  for (auto& r : s) r.epoch -= 1;
  const auto ev = ph::detect_transitions(s);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].epoch == 2);
  CHECK(ev[0].kind == EventKind::kAttractorDrop);
  CHECK(ev[0].delta_dtilde == -6.0);
  CHECK(ph::detect_transitions(from_dtilde({-3, -3, -7.5, -3})).empty());
  CHECK(ph::detect_transitions(from_dtilde(std::vector<double>(20, -4.0))).empty());
}

TEST_CASE("unknown phases produce no events") {
  auto s = from_dtilde({-15, -3, -15});
  for (auto& r : s) r.phase = Phase::kUnknown;
  CHECK(ph::detect_transitions(s).empty());
}

TEST_CASE("phase events alternate in direction") {
  eoc::RandomStream rng(3, eoc::StreamTag::kTest);
  std::vector<double> d;
  for (int k = 0; k < 500; ++k) {
    d.push_back(rng.uniform() < 0.5 ? -15.0 + rng.uniform() : rng.uniform(-13.0, 0.0));
  }
  const auto ev = ph::detect_transitions(from_dtilde(d));
  std::vector<ph::TransitionEvent> phase_only;
  std::copy_if(ev.begin(), ev.end(), std::back_inserter(phase_only),
               [](const ph::TransitionEvent& e) { return e.kind == EventKind::kPhase; });
  REQUIRE(phase_only.size() > 10);
  for (std::size_t k = 1; k < phase_only.size(); ++k) {
    CHECK(phase_only[k].direction != phase_only[k - 1].direction);
  }
}

TEST_CASE("first order-to-chaos event") {
  std::vector<ph::TransitionEvent> ev{{5, Direction::kOrderToChaos, 1, EventKind::kPhase},
                                      {9, Direction::kChaosToOrder, -1, EventKind::kPhase},
                                      {12, Direction::kOrderToChaos, 1, EventKind::kPhase}};
  CHECK(ph::first_order_to_chaos(ev) == 5);
  CHECK_FALSE(ph::first_order_to_chaos({}).has_value());
  const std::vector<ph::TransitionEvent> starts_chaotic(ev.begin() + 1, ev.end());
  CHECK(ph::first_order_to_chaos(starts_chaotic) == 12);
}

TEST_CASE("first order-to-chaos is unchanged by appending epochs") {
  std::vector<double> d{-15, -15, -15, -4, -15, -2};
  const auto first = ph::first_order_to_chaos(ph::detect_transitions(from_dtilde(d)));
  for (int k = 0; k < 30; ++k) {
    d.push_back(k % 3 == 0 ? -15.0 : -3.0);
    CHECK(ph::first_order_to_chaos(ph::detect_transitions(from_dtilde(d))) == first);
  }
}

TEST_CASE("one cycle per sawtooth tooth") {
  for (const int teeth : {1, 2, 5}) {
    // each tooth: rise 1.0 -> 2.5 over 20 epochs, then a 60% drop back to 1.0
    const auto s = from_loss(sawtooth(teeth, 20, 1.0, 2.5));
    const auto cycles = ph::detect_descent_cycles(s);
    CHECK(cycles.size() == static_cast<std::size_t>(teeth));
  }
}

TEST_CASE("two teeth give the constructed peak and drop epochs") {
  const auto s = from_loss(sawtooth(2, 20, 1.0, 2.5));
  const auto c = ph::detect_descent_cycles(s);
  REQUIRE(c.size() == 2);
  // epochs are 1-based: tooth one peaks at index 20, drop lands on index 21
  CHECK(c[0].start_epoch == 1);
  CHECK(c[0].peak_epoch == 21);
  CHECK(c[0].drop_epoch == 22);
  CHECK(c[0].peak_loss == 2.5);
  CHECK(c[0].post_drop_loss == 1.0);
  CHECK(c[1].start_epoch == 22);
  CHECK(c[1].peak_epoch == 42);
  CHECK(c[1].drop_epoch == 43);
  for (const auto& cy : c) {
    CHECK(cy.start_epoch <= cy.peak_epoch);
    CHECK(cy.peak_epoch < cy.drop_epoch);
    CHECK(cy.peak_loss > cy.post_drop_loss);
  }
  CHECK(c[0].drop_epoch <= c[1].start_epoch);
}

TEST_CASE("no cycles without a sharp drop after a long enough rise") {
  std::vector<double> down;
  for (int k = 0; k < 100; ++k) down.push_back(2.0 - 0.01 * k);
  CHECK(ph::detect_descent_cycles(from_loss(down)).empty());
  CHECK(ph::detect_descent_cycles(from_loss(sawtooth(3, 5, 1.0, 2.0))).empty());
  std::vector<double> gentle;
  for (int k = 0; k < 100; ++k) gentle.push_back(1.0 + 0.01 * k);
  gentle.push_back(gentle.back() - 0.05);
  CHECK(ph::detect_descent_cycles(from_loss(gentle)).empty());
}

TEST_CASE("alignment against events") {
  auto s = from_loss(sawtooth(3, 20, 1.0, 2.5));
  const auto cycles = ph::detect_descent_cycles(s);
  REQUIRE(cycles.size() == 3);
  std::vector<ph::TransitionEvent> hit, miss;
  for (const auto& c : cycles) {
    hit.push_back({c.drop_epoch, Direction::kChaosToOrder, -10, EventKind::kPhase});
    miss.push_back({c.drop_epoch + 5, Direction::kChaosToOrder, -10, EventKind::kPhase});
  }
  CHECK(ph::align_report(s, hit, cycles).aligned_fraction == 1.0);
  CHECK(ph::align_report(s, miss, cycles).aligned_fraction == 0.0);
  std::vector<ph::TransitionEvent> near{{cycles[0].drop_epoch - 1, Direction::kOrderToChaos, 5, EventKind::kPhase}};
  const auto a = ph::align_report(s, near, cycles);
  CHECK(a.n_aligned == 1);
  CHECK(a.cycle_aligned == std::vector<bool>{true, false, false});
}

TEST_CASE("landmarks, regime and correlation in the alignment summary") {
  // Loss falls to a minimum at epoch 10, then two teeth follow.
  std::vector<double> loss;
  for (int k = 0; k < 10; ++k) loss.push_back(2.0 - 0.1 * k);
  for (const double v : sawtooth(2, 15, 1.2, 2.4)) loss.push_back(v);
  auto s = from_loss(loss);
  for (std::size_t k = 0; k < s.size(); ++k) {
    s[k].accuracy = k == 4 ? 0.9 : 0.5;
    s[k].wrong_loss = s[k].test_loss * 2.0;
    s[k].n_wrong = 3;
    s[k].dtilde = -10.0 + s[k].test_loss;
    s[k].phase = Phase::kChaos;
  }
  const auto cycles = ph::detect_descent_cycles(s);
  REQUIRE(cycles.size() == 2);
  const std::vector<ph::TransitionEvent> events{{3, Direction::kOrderToChaos, 9, EventKind::kPhase}};
  const auto a = ph::align_report(s, events, cycles);
  CHECK(a.argmin_test_loss == 10);
  CHECK(a.argmax_accuracy == 5);
  CHECK(a.first_order_to_chaos == 3);
  CHECK(a.cycles_after_optimum == 2);
  CHECK(a.regime_start == 10);
  CHECK(a.regime_end == cycles[1].drop_epoch);
  REQUIRE(a.correlation.has_value());
  CHECK(a.correlation->spearman_rho == doctest::Approx(1.0));
  const auto text = ph::format_summary(a);
  CHECK(text.find("argmin_test_loss_epoch: 10\n") != std::string::npos);
  CHECK(text.find("gap_argmin_loss_minus_first_o2c: 7\n") != std::string::npos);
  CHECK(text.find("spearman_rho: 1\n") != std::string::npos);
}

TEST_CASE("correlation examples") {
  std::vector<EpochRecord> s;
  eoc::RandomStream rng(4, eoc::StreamTag::kTest);
  for (int k = 0; k < 30; ++k) {
    EpochRecord r;
    r.epoch = k + 1;
    r.dtilde = rng.uniform(-15.0, 0.0);
    r.wrong_loss = 2.0 * r.dtilde + 7.0;
    r.n_wrong = 1;
    s.push_back(r);
  }
  const auto c = ph::loss_distance_correlation(s, 1, 30);
  CHECK(c.n == 30);
  CHECK(c.spearman_rho == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.pearson_r == doctest::Approx(1.0).epsilon(1e-12));

  for (auto& r : s) r.wrong_loss = -r.wrong_loss;
  CHECK(ph::loss_distance_correlation(s, 1, 30).spearman_rho == doctest::Approx(-1.0).epsilon(1e-12));

  s[3].n_wrong = 0;
  CHECK(ph::loss_distance_correlation(s, 1, 30).n == 29);
  CHECK_THROWS_AS(ph::loss_distance_correlation(s, 1, 2), eoc::InsufficientDataError);
}

TEST_CASE("rank correlation is antisymmetric and tie-aware") {
  const std::vector<double> x{1, 2, 2, 3, 5, 4};
  const std::vector<double> y{2, 1, 4, 3, 6, 5};
  std::vector<double> neg_y;
  for (const double v : y) neg_y.push_back(-v);
  CHECK(ph::spearman(x, neg_y) == doctest::Approx(-ph::spearman(x, y)).epsilon(1e-14));
  CHECK(ph::average_ranks(x) == std::vector<double>{1, 2.5, 2.5, 4, 6, 5});
  // Hand-computed: ranks of x {1,2.5,2.5,4,6,5}, ranks of y {2,1,4,3,6,5}
  // Pearson of ranks = 14 / sqrt(17 * 17.5)
  CHECK(ph::spearman(x, y) == doctest::Approx(14.0 / std::sqrt(17.0 * 17.5)).epsilon(1e-12));
  CHECK_THROWS_AS(ph::pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}),
                  eoc::InsufficientDataError);
}

TEST_CASE("independent noise rarely shows a rank correlation above 0.25") {
  eoc::RandomStream rng(8, eoc::StreamTag::kTest);
  const int trials = 400;
  int exceed = 0;
  std::vector<double> x(200), y(200);
  for (int t = 0; t < trials; ++t) {
    for (auto& v : x) v = rng.normal();
    for (auto& v : y) v = rng.normal();
    exceed += std::abs(ph::spearman(x, y)) >= 0.25;
  }
  // Under independence P(|rho| >= 0.25) is about 4e-4 for n = 200; 1% of
  // 400 trials is 4.
  CHECK(exceed <= 4);
}
