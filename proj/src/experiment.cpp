#include "eoc/experiment.hpp"

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "eoc/checkpoint.hpp"
#include "eoc/corpus.hpp"
#include "eoc/csv.hpp"
#include "eoc/error.hpp"
#include "eoc/plots.hpp"
#include "eoc/probe.hpp"
#include "eoc/training.hpp"

namespace eoc {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kEpochHeader = {"epoch",      "train_loss", "test_loss",
                                               "accuracy",   "wrong_loss", "n_wrong",
                                               "dtilde",     "phase"};
const std::vector<std::string> kReducedHeader = {"epoch", "review_index", "reduced_sum",
                                                 "normalized_reduced_sum"};

struct Data {
  std::vector<corpus::TokenSequence> train;
  std::vector<corpus::TokenSequence> test;
  std::vector<corpus::TokenSequence> probe;
  ModelDims dims;
};

Data prepare_data(const RunConfig& c) {
  std::vector<corpus::Review> reviews;
  if (c.corpus_source == "imdb") {
    reviews = corpus::load_imdb_dir(c.imdb_path);
  } else {
    corpus::SynthConfig s = c.synth;
    s.seed = c.seed;
    reviews = corpus::synth_corpus(s);
  }
  auto [train, test] = corpus::split(reviews, c.train_fraction, c.seed);
  if (train.empty() || test.empty()) {
    throw ConfigError("run: corpus too small for a non-empty train/test split");
  }
  const corpus::Vocab vocab = corpus::build_vocab(train, c.max_vocab);
  Data d;
  d.train = corpus::encode_all(train, vocab, c.seq_len);
  d.test = corpus::encode_all(test, vocab, c.seq_len);
  const auto n_probe = std::min<std::size_t>(d.test.size(), static_cast<std::size_t>(c.probe_n_samples));
  d.probe.assign(d.test.begin(), d.test.begin() + static_cast<std::ptrdiff_t>(n_probe));
  d.dims = {vocab.size(), c.embed_dim, c.hidden_dim};
  return d;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write '" + path + "'");
  }
  out << text;
  if (!out) {
    throw IoError("write failed on '" + path + "'");
  }
}

/// Drops every row whose epoch column exceeds `last_epoch`.
void truncate_csv(const std::string& path, std::int64_t last_epoch) {
  csv::Table t = csv::read(path);
  const std::size_t col = t.column("epoch");
  std::erase_if(t.rows, [&](const csv::Row& r) { return std::stoll(r[col]) > last_epoch; });
  csv::write(path, t);
}

void append_epoch(csv::Writer& w, const phase::EpochRecord& r) {
  w.cell(r.epoch)
      .cell(r.train_loss)
      .cell(r.test_loss)
      .cell(r.accuracy)
      .cell(r.wrong_loss)
      .cell(r.n_wrong)
      .cell(r.dtilde)
      .cell(std::string_view(phase::to_string(r.phase)));
  w.end_row();
}

}  // namespace

std::vector<phase::EpochRecord> read_epochs_csv(const std::string& path) {
  const csv::Table t = csv::read(path);
  const auto c_epoch = t.column("epoch");
  const auto c_train = t.column("train_loss");
  const auto c_test = t.column("test_loss");
  const auto c_acc = t.column("accuracy");
  const auto c_wrong = t.column("wrong_loss");
  const auto c_nwrong = t.column("n_wrong");
  const auto c_dt = t.column("dtilde");
  const auto c_phase = t.column("phase");
  std::vector<phase::EpochRecord> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    phase::EpochRecord r;
    r.epoch = std::stoll(row[c_epoch]);
    r.train_loss = csv::parse_number(row[c_train]);
    r.test_loss = csv::parse_number(row[c_test]);
    r.accuracy = csv::parse_number(row[c_acc]);
    r.wrong_loss = csv::parse_number(row[c_wrong]);
    r.n_wrong = std::stoll(row[c_nwrong]);
    r.dtilde = csv::parse_number(row[c_dt]);
    r.phase = phase::phase_from_string(row[c_phase]);
    out.push_back(r);
  }
  return out;
}

phase::AnalysisParams analysis_params_for(const std::string& run_dir) {
  const fs::path cfg = fs::path(run_dir) / "config.txt";
  if (fs::exists(cfg)) {
    return load_config(cfg.string()).analysis;
  }
  return {};
}

AnalysisOutput analyze_run_dir(const std::string& run_dir, const phase::AnalysisParams& params) {
  const fs::path dir(run_dir);
  const fs::path epochs = dir / "epochs.csv";
  if (!fs::exists(epochs)) {
    throw IoError("report: missing '" + epochs.string() + "'");
  }
  AnalysisOutput out;
  out.records = read_epochs_csv(epochs.string());
  for (auto& r : out.records) {
    if (r.phase != phase::Phase::kUnknown) {
      r.phase = phase::classify_phase(r.dtilde, params.order_threshold);
    }
  }
  out.events = phase::detect_transitions(out.records, params.attractor_drop);
  out.cycles = phase::detect_descent_cycles(out.records, params.min_rise_epochs, params.drop_fraction);
  out.summary = phase::align_report(out.records, out.events, out.cycles, params.align_tolerance);

  csv::Writer tw((dir / "transitions.csv").string(), {"epoch", "direction", "delta_dtilde", "kind"});
  for (const auto& ev : out.events) {
    tw.cell(ev.epoch)
        .cell(std::string_view(phase::to_string(ev.direction)))
        .cell(ev.delta_dtilde)
        .cell(std::string_view(phase::to_string(ev.kind)));
    tw.end_row();
  }
  tw.flush();
  csv::Writer cw((dir / "cycles.csv").string(), {"start", "peak", "drop", "peak_loss", "post_drop_loss"});
  for (const auto& c : out.cycles) {
    cw.cell(c.start_epoch).cell(c.peak_epoch).cell(c.drop_epoch).cell(c.peak_loss).cell(c.post_drop_loss);
    cw.end_row();
  }
  cw.flush();
  write_text((dir / "summary.txt").string(), phase::format_summary(out.summary));
  return out;
}

RunResult run_experiment(const RunConfig& config, const RunOptions& options) {
  config.validate();
  const fs::path dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw IoError("run: cannot create '" + dir.string() + "': " + ec.message());
  }
  const std::string config_path = (dir / "config.txt").string();
  const std::string epochs_path = (dir / "epochs.csv").string();
  const std::string reduced_path = (dir / "reduced_sums.csv").string();
  const std::string ckpt_path = (dir / "checkpoint.bin").string();

  const Data data = prepare_data(config);
  const probe::ProbeConfig probe_cfg = config.probe_config();

  RunResult result;
  result.run_dir = dir.string();

  Params params;
  train::AdamState adam;
  std::int64_t start_epoch = 1;
  const bool resuming = options.resume && fs::exists(ckpt_path);
  if (resuming) {
    // Thread count does not affect results, so it may differ on resume.
    RunConfig recorded = load_config(config_path);
    recorded.threads = config.threads;
    if (to_text(recorded) != to_text(config)) {
      throw ConfigError("run: config differs from the one recorded in '" + config_path + "'");
    }
    ckpt::Checkpoint ck = ckpt::load_checkpoint(ckpt_path, data.dims);
    params = std::move(ck.params);
    adam = std::move(ck.adam);
    start_epoch = static_cast<std::int64_t>(ck.epoch) + 1;
    truncate_csv(epochs_path, ck.epoch);
    truncate_csv(reduced_path, ck.epoch);
    result.records = read_epochs_csv(epochs_path);
  } else {
    write_text(config_path, to_text(config));
    params = train::init_params(data.dims, config.seed, config.embed_init_scale);
    adam = train::AdamState::for_params(params, config.lr);
    csv::Writer(epochs_path, kEpochHeader).flush();
    csv::Writer(reduced_path, kReducedHeader).flush();
  }

  csv::Writer epochs_out(epochs_path, kEpochHeader, true);
  csv::Writer reduced_out(reduced_path, kReducedHeader, true);
  for (std::int64_t epoch = start_epoch; epoch <= config.epochs; ++epoch) {
    phase::EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = train::train_epoch(params, adam, data.train, config.batch_size, config.seed,
                                        epoch, config.threads)
                         .mean_loss;
    const train::EvalResult ev = train::evaluate(params, data.test, config.threads);
    rec.test_loss = ev.test_loss;
    rec.accuracy = ev.accuracy;
    rec.wrong_loss = ev.wrong_loss;
    rec.n_wrong = ev.n_wrong;
    if (config.probe_enabled) {
      const probe::EpochProbe pr = probe::probe_epoch(params, data.probe, probe_cfg, epoch);
      rec.dtilde = pr.dtilde;
      rec.phase = phase::classify_phase(pr.dtilde, config.analysis.order_threshold);
      for (std::size_t k = 0; k < pr.reduced_sums.size(); ++k) {
        reduced_out.cell(epoch)
            .cell(static_cast<std::int64_t>(k))
            .cell(pr.reduced_sums[k])
            .cell(pr.normalized_reduced_sums[k]);
        reduced_out.end_row();
      }
      reduced_out.flush();
    } else {
      rec.dtilde = std::numeric_limits<double>::quiet_NaN();
      rec.phase = phase::Phase::kUnknown;
    }
    append_epoch(epochs_out, rec);
    epochs_out.flush();
    ckpt::save_checkpoint(ckpt_path, {static_cast<std::uint32_t>(epoch), params, adam});
    result.records.push_back(rec);
    if (options.on_epoch) {
      options.on_epoch(rec);
    }
    if (options.stop_after && epoch >= *options.stop_after && epoch < config.epochs) {
      return result;
    }
  }
  epochs_out.flush();
  reduced_out.flush();

  AnalysisOutput analysis = analyze_run_dir(dir.string(), config.analysis);
  result.summary = std::move(analysis.summary);
  if (options.plots) {
    plots::render_plots(dir.string());
  }
  result.completed = true;
  return result;
}

}  // namespace eoc
