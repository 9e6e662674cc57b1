#include "eoc/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "eoc/csv.hpp"
#include "eoc/error.hpp"

namespace eoc::plots {

namespace fs = std::filesystem;

namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 70.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 50.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void finish() {
    if (!std::isfinite(lo)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
  double x(double v) const { return kLeft + (v - lo) / (hi - lo) * (kWidth - kLeft - kRight); }
  double y(double v) const { return kHeight - kBottom - (v - lo) / (hi - lo) * (kHeight - kTop - kBottom); }
};

class Svg {
 public:
  explicit Svg(const std::string& title) {
    out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kWidth) << "\" height=\""
         << fmt(kHeight) << "\" viewBox=\"0 0 " << fmt(kWidth) << ' ' << fmt(kHeight) << "\">\n"
         << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
         << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
         << title << "</text>\n";
  }

  void frame(const Range& xr, const Range& left, const std::optional<Range>& right,
             const std::string& xlabel, const std::string& left_label, const std::string& right_label) {
    const double x0 = kLeft;
    const double x1 = kWidth - kRight;
    const double y0 = kHeight - kBottom;
    const double y1 = kTop;
    out_ << "<g stroke=\"black\" fill=\"none\">\n"
         << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(x1) << "\" y2=\""
         << fmt(y0) << "\"/>\n"
         << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(x0) << "\" y2=\""
         << fmt(y1) << "\"/>\n";
    if (right) {
      out_ << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(x1)
           << "\" y2=\"" << fmt(y1) << "\"/>\n";
    }
    out_ << "</g>\n<g font-size=\"11\">\n";
    label(x0, y0 + 16, xr.lo, "middle");
    label(x1, y0 + 16, xr.hi, "middle");
    label(x0 - 6, y0, left.lo, "end");
    label(x0 - 6, y1 + 4, left.hi, "end");
    if (right) {
      label(x1 + 6, y0, right->lo, "start");
      label(x1 + 6, y1 + 4, right->hi, "start");
    }
    out_ << "<text x=\"" << fmt((x0 + x1) / 2) << "\" y=\"" << fmt(kHeight - 12)
         << "\" text-anchor=\"middle\">" << xlabel << "</text>\n"
         << "<text x=\"14\" y=\"" << fmt((y0 + y1) / 2) << "\" transform=\"rotate(-90 14 "
         << fmt((y0 + y1) / 2) << ")\" text-anchor=\"middle\">" << left_label << "</text>\n";
    if (right) {
      out_ << "<text x=\"" << fmt(kWidth - 14) << "\" y=\"" << fmt((y0 + y1) / 2)
           << "\" transform=\"rotate(90 " << fmt(kWidth - 14) << ' ' << fmt((y0 + y1) / 2)
           << ")\" text-anchor=\"middle\">" << right_label << "</text>\n";
    }
    out_ << "</g>\n";
  }

  void polyline(const std::vector<double>& xs, const std::vector<double>& ys, const Range& xr,
                const Range& yr, const std::string& color, const std::string& cls) {
    out_ << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << color
         << "\" stroke-width=\"1.2\" points=\"";
    bool first = true;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      if (!std::isfinite(ys[k])) {
        continue;
      }
      out_ << (first ? "" : " ") << fmt(xr.x(xs[k])) << ',' << fmt(yr.y(ys[k]));
      first = false;
    }
    out_ << "\"/>\n";
  }

  void points(const std::vector<double>& xs, const std::vector<double>& ys, const Range& xr,
              const Range& yr, const std::string& color, const std::string& cls, double radius,
              bool tag_epoch) {
    out_ << "<g class=\"" << cls << "\" fill=\"" << color << "\">\n";
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const double y = std::isfinite(ys[k]) ? yr.y(ys[k]) : yr.y(yr.lo);
      out_ << "<circle";
      if (tag_epoch) {
        out_ << " data-epoch=\"" << static_cast<long long>(xs[k]) << '"';
      }
      out_ << " cx=\"" << fmt(xr.x(xs[k])) << "\" cy=\"" << fmt(y) << "\" r=\"" << fmt(radius)
           << "\"/>\n";
    }
    out_ << "</g>\n";
  }

  void save(const std::string& path) {
    out_ << "</svg>\n";
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
      throw IoError("plots: cannot write '" + path + "'");
    }
    f << out_.str();
  }

 private:
  void label(double x, double y, double v, const char* anchor) {
    out_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" text-anchor=\"" << anchor << "\">"
         << csv::format_number(std::round(v * 1000.0) / 1000.0) << "</text>\n";
  }

  std::ostringstream out_;
};

std::vector<double> numeric_column(const csv::Table& t, const std::string& name) {
  const std::size_t c = t.column(name);
  std::vector<double> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    out.push_back(csv::parse_number(row[c]));
  }
  return out;
}

}  // namespace

void render_map_plot(const std::string& scan_csv, const std::string& svg_path) {
  if (!fs::exists(scan_csv)) {
    throw IoError("plots: missing '" + scan_csv + "'");
  }
  const csv::Table t = csv::read(scan_csv);
  const auto r = numeric_column(t, "r");
  const auto dist = numeric_column(t, "ln_distance");
  const auto asym = numeric_column(t, "asymptote");

  std::vector<double> grid;
  std::vector<double> mean;
  for (std::size_t k = 0; k < r.size();) {
    std::size_t j = k;
    double sum = 0.0;
    while (j < r.size() && r[j] == r[k]) {
      sum += dist[j];
      ++j;
    }
    grid.push_back(r[k]);
    mean.push_back(sum / static_cast<double>(j - k));
    k = j;
  }
  Range xr, dr, ar;
  for (const double v : r) xr.add(v);
  for (const double v : mean) dr.add(v);
  for (const double v : asym) ar.add(v);
  xr.finish();
  dr.finish();
  ar.finish();

  Svg svg("tanh map: asymptotic log distance (green) and asymptotes (blue)");
  svg.frame(xr, ar, dr, "r", "asymptote k", "mean ln distance");
  svg.points(r, asym, xr, ar, "#1f4fb4", "asymptotes", 0.6, false);
  svg.polyline(grid, mean, xr, dr, "#2a9d3a", "distance");
  svg.save(svg_path);
}

std::vector<std::string> render_plots(const std::string& run_dir) {
  const fs::path dir(run_dir);
  const fs::path epochs_path = dir / "epochs.csv";
  const fs::path reduced_path = dir / "reduced_sums.csv";
  if (!fs::exists(epochs_path)) {
    throw IoError("plots: missing '" + epochs_path.string() + "'");
  }
  if (!fs::exists(reduced_path)) {
    throw IoError("plots: missing '" + reduced_path.string() + "'");
  }
  const fs::path out_dir = dir / "plots";
  fs::create_directories(out_dir);
  std::vector<std::string> written;

  const csv::Table et = csv::read(epochs_path.string());
  const auto epoch = numeric_column(et, "epoch");
  const auto dtilde = numeric_column(et, "dtilde");
  const auto test_loss = numeric_column(et, "test_loss");
  Range xr, dr, lr;
  for (const double v : epoch) xr.add(v);
  for (const double v : dtilde) dr.add(v);
  for (const double v : test_loss) lr.add(v);
  xr.finish();
  dr.finish();
  lr.finish();

  {
    Svg svg("asymptotic log distance (green) and test loss (brown)");
    svg.frame(xr, dr, lr, "epoch", "dtilde", "test loss");
    svg.polyline(epoch, dtilde, xr, dr, "#2a9d3a", "dtilde");
    svg.points(epoch, dtilde, xr, dr, "#2a9d3a", "dtilde-points", 1.2, true);
    svg.polyline(epoch, test_loss, xr, lr, "#8b4513", "test-loss");
    const std::string path = (out_dir / "dtilde_loss.svg").string();
    svg.save(path);
    written.push_back(path);
  }
  {
    const csv::Table rt = csv::read(reduced_path.string());
    const auto rs_epoch = numeric_column(rt, "epoch");
    const auto rs = numeric_column(rt, "normalized_reduced_sum");
    Range sr;
    for (const double v : rs) sr.add(v);
    sr.finish();
    Svg svg("normalized reduced sums (blue) and test loss (brown)");
    svg.frame(xr, sr, lr, "epoch", "h_T . 1 - mean", "test loss");
    svg.points(rs_epoch, rs, xr, sr, "#1f4fb4", "reduced-sums", 0.7, false);
    svg.polyline(epoch, test_loss, xr, lr, "#8b4513", "test-loss");
    const std::string path = (out_dir / "reduced_sums.svg").string();
    svg.save(path);
    written.push_back(path);
  }
  if (fs::exists(dir / "map_scan.csv")) {
    const std::string path = (out_dir / "map_scan.svg").string();
    render_map_plot((dir / "map_scan.csv").string(), path);
    written.push_back(path);
  }
  return written;
}

}  // namespace eoc::plots
