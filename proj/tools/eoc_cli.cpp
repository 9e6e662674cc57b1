// Command-line front end.
//
//   eoc train --config FILE [--resume] [--plots] [--stop-after N]
//   eoc map scan --r-min A --r-max B --n-r N --seeds S --out scan.csv
//   eoc map alias-demo --out-dir DIR
//   eoc report --run-dir DIR [--plots]
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "eoc/config.hpp"
#include "eoc/csv.hpp"
#include "eoc/experiment.hpp"
#include "eoc/map_lab.hpp"
#include "eoc/plots.hpp"

namespace {

void add_map_options(CLI::App* cmd, eoc::map::MapConfig& cfg) {
  cmd->add_option("--burn-in", cfg.burn_in, "Iterations before the twin trajectories split");
  cmd->add_option("--n-iter", cfg.n_iter, "Total iterations per seed");
  cmd->add_option("--epsilon", cfg.epsilon, "Twin-trajectory perturbation");
  cmd->add_option("--floor-ln", cfg.floor_ln, "Log-distance floor");
  cmd->add_option("--seed", cfg.master_seed, "Master seed for initial values");
  cmd->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)");
  cmd->add_option("--order-threshold", cfg.order_threshold, "Ordered if mean ln distance <= this");
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    out += (k ? " " : "") + eoc::csv::format_number(v[k]);
  }
  return out.empty() ? "none" : out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LSTM order/chaos training probe and tanh-map laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  bool resume = false;
  bool plots = false;
  std::int64_t stop_after = -1;
  auto* train = app.add_subcommand("train", "Train with per-epoch stability probing");
  train->add_option("--config", config_path, "key = value config file")->required();
  train->add_flag("--resume", resume, "Continue from the run directory's checkpoint");
  train->add_flag("--plots", plots, "Render SVG figures at the end");
  train->add_option("--stop-after", stop_after, "Stop after this epoch (for testing resume)");

  eoc::map::MapConfig map_cfg;
  auto* map = app.add_subcommand("map", "tanh map experiments");
  map->require_subcommand(1);
  double r_min = 0.0;
  double r_max = 12.0;
  int n_r = 241;
  std::string scan_out = "map_scan.csv";
  std::string scan_plot;
  auto* scan = map->add_subcommand("scan", "Bifurcation / asymptotic-distance scan over r");
  scan->add_option("--r-min", r_min, "Lower end of the r grid");
  scan->add_option("--r-max", r_max, "Upper end of the r grid");
  scan->add_option("--n-r", n_r, "Grid points (inclusive of endpoints)");
  scan->add_option("--seeds", map_cfg.k0_seeds, "Random initial values per r");
  scan->add_option("--out", scan_out, "Output CSV");
  scan->add_option("--plot", scan_plot, "Also write an SVG figure here");
  add_map_options(scan, map_cfg);

  std::string alias_dir = "alias_demo";
  auto* alias = map->add_subcommand("alias-demo", "50- vs 281-point scans over r in [10.5, 11]");
  alias->add_option("--out-dir", alias_dir, "Output directory");
  alias->add_option("--seeds", map_cfg.k0_seeds, "Random initial values per r");
  add_map_options(alias, map_cfg);

  std::string run_dir;
  bool report_plots = false;
  auto* report = app.add_subcommand("report", "Re-run phase analysis on a finished run");
  report->add_option("--run-dir", run_dir, "Run directory")->required();
  report->add_flag("--plots", report_plots, "Render SVG figures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*train) {
      const eoc::RunConfig cfg = eoc::load_config(config_path);
      eoc::RunOptions opts;
      opts.resume = resume;
      opts.plots = plots;
      if (stop_after >= 0) {
        opts.stop_after = stop_after;
      }
      opts.on_epoch = [](const eoc::phase::EpochRecord& r) {
        if (r.epoch % 25 == 0) {
          std::cerr << "epoch " << r.epoch << " train " << r.train_loss << " test " << r.test_loss
                    << " acc " << r.accuracy << " dtilde " << r.dtilde << '\n';
        }
      };
      const eoc::RunResult res = eoc::run_experiment(cfg, opts);
      if (res.summary) {
        std::cout << eoc::phase::format_summary(*res.summary);
      }
      std::cout << "run directory: " << res.run_dir << '\n';
    } else if (*scan) {
      const auto records = eoc::map::bifurcation_scan(r_min, r_max, n_r, map_cfg);
      eoc::map::write_scan_csv(scan_out, records);
      if (!scan_plot.empty()) {
        eoc::plots::render_map_plot(scan_out, scan_plot);
      }
      std::cout << "wrote " << records.size() << " grid points to " << scan_out << '\n';
    } else if (*alias) {
      std::filesystem::create_directories(alias_dir);
      const auto rep = eoc::map::aliasing_demo(map_cfg);
      const auto dir = std::filesystem::path(alias_dir);
      eoc::map::write_scan_csv((dir / "scan_low.csv").string(), rep.low);
      eoc::map::write_scan_csv((dir / "scan_high.csv").string(), rep.high);
      std::ofstream out(dir / "alias_report.txt", std::ios::binary);
      out << "low_resolution_points: " << rep.low.size() << '\n'
          << "low_resolution_ordered_r: " << join(rep.low_ordered) << '\n'
          << "high_resolution_points: " << rep.high.size() << '\n'
          << "high_resolution_ordered_r: " << join(rep.high_ordered) << '\n';
      if (!out) {
        throw eoc::IoError("cannot write alias_report.txt in '" + alias_dir + "'");
      }
      std::cout << "low-resolution ordered r: " << join(rep.low_ordered) << '\n'
                << "high-resolution ordered r: " << join(rep.high_ordered) << '\n';
    } else if (*report) {
      const auto out = eoc::analyze_run_dir(run_dir, eoc::analysis_params_for(run_dir));
      if (report_plots) {
        eoc::plots::render_plots(run_dir);
      }
      std::cout << eoc::phase::format_summary(out.summary);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
