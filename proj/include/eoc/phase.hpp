// Post-processing of per-epoch series: phase labels, order/chaos transition
// events, descent cycles in the test loss, and their alignment.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eoc::phase {

enum class Phase { kOrder, kChaos, kUnknown };

const char* to_string(Phase p);
Phase phase_from_string(const std::string& s);

struct EpochRecord {
  std::int64_t epoch = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  double accuracy = 0.0;
  double wrong_loss = 0.0;
  std::int64_t n_wrong = 0;
  double dtilde = 0.0;
  Phase phase = Phase::kUnknown;
};

enum class Direction { kOrderToChaos, kChaosToOrder };
enum class EventKind { kPhase, kAttractorDrop };

const char* to_string(Direction d);
const char* to_string(EventKind k);

struct TransitionEvent {
  std::int64_t epoch = 0;
  Direction direction = Direction::kOrderToChaos;
  double delta_dtilde = 0.0;
  EventKind kind = EventKind::kPhase;
};

struct DescentCycle {
  std::int64_t start_epoch = 0;
  std::int64_t peak_epoch = 0;
  std::int64_t drop_epoch = 0;
  double peak_loss = 0.0;
  double post_drop_loss = 0.0;
};

struct AnalysisParams {
  double order_threshold = -14.0;
  double attractor_drop = 5.0;
  std::int64_t min_rise_epochs = 10;
  double drop_fraction = 0.3;
  std::int64_t align_tolerance = 1;
};

/// Order iff dtilde <= order_threshold.
Phase classify_phase(double dtilde, double order_threshold = -14.0);

/// One event per phase-label change (at the first epoch of the new phase),
/// plus attractor-drop events where dtilde falls by at least
/// `attractor_drop` in one epoch without changing label.
std::vector<TransitionEvent> detect_transitions(std::span<const EpochRecord> series,
                                                double attractor_drop = 5.0);

/// Rise-then-sharp-drop segments of test_loss; see README for the rule.
std::vector<DescentCycle> detect_descent_cycles(std::span<const EpochRecord> series,
                                                std::int64_t min_rise_epochs = 10,
                                                double drop_fraction = 0.3);

/// Epoch of the earliest order-to-chaos phase event.
std::optional<std::int64_t> first_order_to_chaos(std::span<const TransitionEvent> events);

struct CorrelationResult {
  double spearman_rho = 0.0;
  double pearson_r = 0.0;
  std::int64_t n = 0;
};

/// Average ranks (ties share the mean rank), 1-based.
std::vector<double> average_ranks(std::span<const double> values);
double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);

/// Correlation of wrong_loss with dtilde over epochs in [first, last] that
/// have n_wrong > 0. Throws InsufficientDataError below 3 points.
CorrelationResult loss_distance_correlation(std::span<const EpochRecord> series,
                                            std::int64_t first_epoch, std::int64_t last_epoch);

struct AlignmentSummary {
  std::int64_t n_cycles = 0;
  std::int64_t n_aligned = 0;
  double aligned_fraction = 0.0;
  std::vector<bool> cycle_aligned;
  std::optional<std::int64_t> argmin_test_loss;
  std::optional<std::int64_t> argmax_accuracy;
  std::optional<std::int64_t> first_order_to_chaos;
  std::int64_t n_transitions = 0;
  std::int64_t n_attractor_drops = 0;
  std::int64_t cycles_after_optimum = 0;
  std::optional<CorrelationResult> correlation;
  std::string correlation_note;
  std::optional<std::int64_t> regime_start;
  std::optional<std::int64_t> regime_end;
};

/// Alignment of each cycle's drop epoch with any event within
/// +-tolerance, plus the optimum landmarks and the loss–distance
/// correlation over the multi-descent regime (first cycle start after the
/// test-loss minimum through the last drop).
AlignmentSummary align_report(std::span<const EpochRecord> series,
                              std::span<const TransitionEvent> events,
                              std::span<const DescentCycle> cycles, std::int64_t tolerance = 1);

/// Plain-text "key: value" rendering.
std::string format_summary(const AlignmentSummary& s);

}  // namespace eoc::phase
