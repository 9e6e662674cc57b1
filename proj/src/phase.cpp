#include "eoc/phase.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "eoc/csv.hpp"
#include "eoc/error.hpp"

namespace eoc::phase {

const char* to_string(Phase p) {
  switch (p) {
    case Phase::kOrder:
      return "order";
    case Phase::kChaos:
      return "chaos";
    case Phase::kUnknown:
      break;
  }
  return "unknown";
}

Phase phase_from_string(const std::string& s) {
  if (s == "order") {
    return Phase::kOrder;
  }
  if (s == "chaos") {
    return Phase::kChaos;
  }
  return Phase::kUnknown;
}

const char* to_string(Direction d) {
  return d == Direction::kOrderToChaos ? "order_to_chaos" : "chaos_to_order";
}

const char* to_string(EventKind k) { return k == EventKind::kPhase ? "phase" : "attractor_drop"; }

Phase classify_phase(double dtilde, double order_threshold) {
  return dtilde <= order_threshold ? Phase::kOrder : Phase::kChaos;
}

std::vector<TransitionEvent> detect_transitions(std::span<const EpochRecord> series,
                                                double attractor_drop) {
  std::vector<TransitionEvent> events;
  for (std::size_t k = 1; k < series.size(); ++k) {
    const EpochRecord& prev = series[k - 1];
    const EpochRecord& cur = series[k];
    if (prev.phase == Phase::kUnknown || cur.phase == Phase::kUnknown) {
      continue;
    }
    const double delta = cur.dtilde - prev.dtilde;
    if (prev.phase != cur.phase) {
      events.push_back({cur.epoch,
                        cur.phase == Phase::kChaos ? Direction::kOrderToChaos
                                                   : Direction::kChaosToOrder,
                        delta, EventKind::kPhase});
    } else if (delta <= -attractor_drop) {
      events.push_back({cur.epoch, Direction::kChaosToOrder, delta, EventKind::kAttractorDrop});
    }
  }
  return events;
}

std::vector<DescentCycle> detect_descent_cycles(std::span<const EpochRecord> series,
                                                std::int64_t min_rise_epochs, double drop_fraction) {
  std::vector<DescentCycle> cycles;
  const std::size_t n = series.size();
  std::size_t seg = 0;
  while (seg + 1 < n) {
    std::size_t min_at = seg;
    bool found = false;
    for (std::size_t e = seg; e + 1 < n; ++e) {
      if (series[e].test_loss <= series[min_at].test_loss) {
        min_at = e;
      }
      if (static_cast<std::int64_t>(e - min_at) < min_rise_epochs) {
        continue;
      }
      std::size_t peak_at = min_at;
      for (std::size_t j = min_at; j <= e; ++j) {
        if (series[j].test_loss > series[peak_at].test_loss) {
          peak_at = j;
        }
      }
      const double low = series[min_at].test_loss;
      const double amplitude = series[peak_at].test_loss - low;
      const double drop = series[e].test_loss - series[e + 1].test_loss;
      if (amplitude > 0.0 && series[e].test_loss > low && drop > 0.0 &&
          drop >= drop_fraction * amplitude) {
        cycles.push_back({series[min_at].epoch, series[peak_at].epoch, series[e + 1].epoch,
                          series[peak_at].test_loss, series[e + 1].test_loss});
        seg = e + 1;
        found = true;
        break;
      }
    }
    if (!found) {
      break;
    }
  }
  return cycles;
}

std::optional<std::int64_t> first_order_to_chaos(std::span<const TransitionEvent> events) {
  for (const auto& ev : events) {
    if (ev.kind == EventKind::kPhase && ev.direction == Direction::kOrderToChaos) {
      return ev.epoch;
    }
  }
  return std::nullopt;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t k = 0;
  while (k < order.size()) {
    std::size_t j = k;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[k]]) {
      ++j;
    }
    const double rank = 0.5 * static_cast<double>(k + j) + 1.0;
    for (std::size_t t = k; t <= j; ++t) {
      ranks[order[t]] = rank;
    }
    k = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InsufficientDataError("pearson: need two equally sized samples of length >= 2");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw InsufficientDataError("pearson: a sample has zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

CorrelationResult loss_distance_correlation(std::span<const EpochRecord> series,
                                            std::int64_t first_epoch, std::int64_t last_epoch) {
  std::vector<double> loss;
  std::vector<double> dist;
  for (const auto& r : series) {
    if (r.epoch >= first_epoch && r.epoch <= last_epoch && r.n_wrong > 0 &&
        std::isfinite(r.dtilde)) {
      loss.push_back(r.wrong_loss);
      dist.push_back(r.dtilde);
    }
  }
  if (loss.size() < 3) {
    throw InsufficientDataError("loss_distance_correlation: fewer than 3 epochs with n_wrong > 0");
  }
  CorrelationResult out;
  out.n = static_cast<std::int64_t>(loss.size());
  out.spearman_rho = spearman(loss, dist);
  out.pearson_r = pearson(loss, dist);
  return out;
}

AlignmentSummary align_report(std::span<const EpochRecord> series,
                              std::span<const TransitionEvent> events,
                              std::span<const DescentCycle> cycles, std::int64_t tolerance) {
  AlignmentSummary s;
  s.n_cycles = static_cast<std::int64_t>(cycles.size());
  for (const auto& c : cycles) {
    const bool hit = std::any_of(events.begin(), events.end(), [&](const TransitionEvent& ev) {
      return std::abs(ev.epoch - c.drop_epoch) <= tolerance;
    });
    s.cycle_aligned.push_back(hit);
    s.n_aligned += hit ? 1 : 0;
  }
  s.aligned_fraction =
      s.n_cycles > 0 ? static_cast<double>(s.n_aligned) / static_cast<double>(s.n_cycles) : 0.0;
  for (const auto& ev : events) {
    (ev.kind == EventKind::kPhase ? s.n_transitions : s.n_attractor_drops) += 1;
  }
  s.first_order_to_chaos = first_order_to_chaos(events);

  if (!series.empty()) {
    std::size_t best_loss = 0;
    std::size_t best_acc = 0;
    for (std::size_t k = 1; k < series.size(); ++k) {
      if (series[k].test_loss < series[best_loss].test_loss) {
        best_loss = k;
      }
      if (series[k].accuracy > series[best_acc].accuracy) {
        best_acc = k;
      }
    }
    s.argmin_test_loss = series[best_loss].epoch;
    s.argmax_accuracy = series[best_acc].epoch;
  }

  for (const auto& c : cycles) {
    if (s.argmin_test_loss && c.start_epoch >= *s.argmin_test_loss) {
      ++s.cycles_after_optimum;
      if (!s.regime_start) {
        s.regime_start = c.start_epoch;
      }
      s.regime_end = c.drop_epoch;
    }
  }
  if (s.regime_start) {
    try {
      s.correlation = loss_distance_correlation(series, *s.regime_start, *s.regime_end);
    } catch (const InsufficientDataError& e) {
      s.correlation_note = e.what();
    }
  } else {
    s.correlation_note = "no descent cycles after the test-loss minimum";
  }
  return s;
}

namespace {

std::string opt(const std::optional<std::int64_t>& v) {
  return v ? std::to_string(*v) : std::string("none");
}

std::string gap(const std::optional<std::int64_t>& a, const std::optional<std::int64_t>& b) {
  return a && b ? std::to_string(*a - *b) : std::string("none");
}

}  // namespace

std::string format_summary(const AlignmentSummary& s) {
  std::ostringstream out;
  out << "n_cycles: " << s.n_cycles << '\n';
  out << "cycles_after_optimum: " << s.cycles_after_optimum << '\n';
  out << "aligned_cycles: " << s.n_aligned << '\n';
  out << "aligned_fraction: " << csv::format_number(s.aligned_fraction) << '\n';
  out << "n_transitions: " << s.n_transitions << '\n';
  out << "n_attractor_drops: " << s.n_attractor_drops << '\n';
  out << "argmin_test_loss_epoch: " << opt(s.argmin_test_loss) << '\n';
  out << "argmax_accuracy_epoch: " << opt(s.argmax_accuracy) << '\n';
  out << "first_order_to_chaos_epoch: " << opt(s.first_order_to_chaos) << '\n';
  out << "gap_argmin_loss_minus_first_o2c: " << gap(s.argmin_test_loss, s.first_order_to_chaos)
      << '\n';
  out << "gap_argmax_accuracy_minus_first_o2c: "
      << gap(s.argmax_accuracy, s.first_order_to_chaos) << '\n';
  out << "gap_argmin_loss_minus_argmax_accuracy: " << gap(s.argmin_test_loss, s.argmax_accuracy)
      << '\n';
  out << "multi_descent_start_epoch: " << opt(s.regime_start) << '\n';
  out << "multi_descent_end_epoch: " << opt(s.regime_end) << '\n';
  if (s.correlation) {
    out << "spearman_rho: " << csv::format_number(s.correlation->spearman_rho) << '\n';
    out << "pearson_r: " << csv::format_number(s.correlation->pearson_r) << '\n';
    out << "correlation_n: " << s.correlation->n << '\n';
  } else {
    out << "spearman_rho: none\n";
    out << "pearson_r: none\n";
    out << "correlation_n: 0\n";
    out << "correlation_note: " << s.correlation_note << '\n';
  }
  return out.str();
}

}  // namespace eoc::phase
