#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace eoc::csv {

/// Shortest decimal that parses back to exactly `value` (never more than 17
/// significant digits). Non-finite values print as "nan", "inf", "-inf".
std::string format_number(double value);

/// Parses a cell produced by format_number.
double parse_number(std::string_view cell);

using Cell = std::string;
using Row = std::vector<Cell>;

/// Writes a header then rows, LF line endings. Opening in append mode skips
/// the header (used when resuming a run).
class Writer {
 public:
  Writer(const std::string& path, const std::vector<std::string>& header, bool append = false);

  Writer& cell(double value);
  Writer& cell(std::int64_t value);
  Writer& cell(std::string_view text);
  /// Terminates the current row; throws if the column count disagrees with
  /// the header.
  void end_row();
  void flush();

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t columns_;
  std::size_t in_row_ = 0;
};

struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;

  /// Column index by header name; throws IoError if absent.
  std::size_t column(std::string_view name) const;
};

Table read(const std::string& path);

/// Writes header plus all rows in one go.
void write(const std::string& path, const Table& table);

}  // namespace eoc::csv
