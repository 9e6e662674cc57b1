// Static SVG figures. Presentation only: nothing here feeds back into
// analysis, and output bytes depend only on the input CSVs.
#pragma once

#include <string>
#include <vector>

namespace eoc::plots {

/// Writes into <run_dir>/plots/:
///   dtilde_loss.svg   dtilde and test loss against epoch (twin axes)
///   reduced_sums.svg  normalized reduced sums against epoch, test loss overlaid
///   map_scan.svg      only when <run_dir>/map_scan.csv exists
/// Returns the written paths. Throws IoError when epochs.csv is missing.
std::vector<std::string> render_plots(const std::string& run_dir);

/// Mean log distance and asymptote samples against r from a map_scan CSV.
void render_map_plot(const std::string& scan_csv, const std::string& svg_path);

}  // namespace eoc::plots
