// End-to-end training run: per epoch train, evaluate, probe and classify,
// appending to CSVs and checkpointing; phase analysis at the end.
//
// Run directory layout:
//   config.txt        resolved configuration
//   epochs.csv        epoch,train_loss,test_loss,accuracy,wrong_loss,n_wrong,dtilde,phase
//   reduced_sums.csv  epoch,review_index,reduced_sum,normalized_reduced_sum
//   checkpoint.bin    latest epoch (see checkpoint.hpp)
//   transitions.csv   epoch,direction,delta_dtilde,kind
//   cycles.csv        start,peak,drop,peak_loss,post_drop_loss
//   summary.txt       alignment summary
//   plots/*.svg       with --plots
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eoc/config.hpp"
#include "eoc/phase.hpp"

namespace eoc {

struct RunOptions {
  bool resume = false;
  /// Stop after this epoch without running the final analysis (simulates an
  /// interrupted run).
  std::optional<std::int64_t> stop_after;
  bool plots = false;
  /// Called after every epoch with the new record.
  std::function<void(const phase::EpochRecord&)> on_epoch;
};

struct RunResult {
  std::string run_dir;
  std::vector<phase::EpochRecord> records;
  std::optional<phase::AlignmentSummary> summary;
  bool completed = false;
};

RunResult run_experiment(const RunConfig& config, const RunOptions& options = {});

struct AnalysisOutput {
  std::vector<phase::EpochRecord> records;
  std::vector<phase::TransitionEvent> events;
  std::vector<phase::DescentCycle> cycles;
  phase::AlignmentSummary summary;
};

/// Re-runs phase analysis from <run_dir>/epochs.csv and writes
/// transitions.csv, cycles.csv and summary.txt.
AnalysisOutput analyze_run_dir(const std::string& run_dir, const phase::AnalysisParams& params);

/// Analysis parameters from <run_dir>/config.txt when present, defaults
/// otherwise.
phase::AnalysisParams analysis_params_for(const std::string& run_dir);

std::vector<phase::EpochRecord> read_epochs_csv(const std::string& path);

}  // namespace eoc
