// Run configuration as flat `key = value` text. Lines starting with '#' are
// comments. A `preset` key, if present, is applied before all other keys
// regardless of where it appears.
#pragma once

#include <cstdint>
#include <string>

#include "eoc/corpus.hpp"
#include "eoc/phase.hpp"
#include "eoc/probe.hpp"

namespace eoc {

struct RunConfig {
  std::string mode = "train_probe";
  std::string preset = "desk";
  std::uint64_t seed = 1;
  std::string out_dir = "run";
  unsigned threads = 1;

  std::string corpus_source = "synthetic";  // synthetic | imdb
  std::string imdb_path;
  corpus::SynthConfig synth{.signal_strength = 0.6};
  std::int32_t max_vocab = 200;
  std::int32_t seq_len = 60;
  double train_fraction = 0.7;

  std::int64_t embed_dim = 8;
  std::int64_t hidden_dim = 16;

  double lr = 0.005;
  std::int32_t batch_size = 32;
  std::int64_t epochs = 600;
  double embed_init_scale = 0.05;

  bool probe_enabled = true;
  double probe_sigma = 1e-5;
  std::int32_t probe_t_total = 480;
  std::int32_t probe_n_samples = 100;
  double floor_ln = -15.0;

  phase::AnalysisParams analysis;

  /// Probe settings for this run (l_real = seq_len, master seed = seed).
  probe::ProbeConfig probe_config() const;

  void validate() const;
};

/// "desk" or "paper"; throws ConfigError otherwise.
RunConfig preset_config(const std::string& name);

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Every key in a fixed order; parse_config(to_text(c)) == c.
std::string to_text(const RunConfig& c);

}  // namespace eoc
