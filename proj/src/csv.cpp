#include "eoc/csv.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <system_error>

#include "eoc/error.hpp"

namespace eoc::csv {

std::string format_number(double value) {
  if (std::isnan(value)) {
    return "nan";
  }
  if (std::isinf(value)) {
    return value > 0 ? "inf" : "-inf";
  }
  char buf[64];
  // Fixed notation for large magnitudes would print every integer digit.
  const auto res = std::abs(value) >= 1e16
                       ? std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::scientific)
                       : std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_number(std::string_view cell) {
  if (cell == "nan") {
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (cell == "inf") {
    return std::numeric_limits<double>::infinity();
  }
  if (cell == "-inf") {
    return -std::numeric_limits<double>::infinity();
  }
  double value = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
    throw IoError("csv: cannot parse number '" + std::string(cell) + "'");
  }
  return value;
}

Writer::Writer(const std::string& path, const std::vector<std::string>& header, bool append)
    : path_(path), columns_(header.size()) {
  out_.open(path, append ? std::ios::binary | std::ios::app : std::ios::binary | std::ios::trunc);
  if (!out_) {
    throw IoError("csv: cannot open '" + path + "' for writing");
  }
  if (!append) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      out_ << (i ? "," : "") << header[i];
    }
    out_ << '\n';
  }
}

Writer& Writer::cell(double value) { return cell(std::string_view(format_number(value))); }

Writer& Writer::cell(std::int64_t value) { return cell(std::string_view(std::to_string(value))); }

Writer& Writer::cell(std::string_view text) {
  if (in_row_ > 0) {
    out_ << ',';
  }
  out_ << text;
  ++in_row_;
  return *this;
}

void Writer::end_row() {
  if (in_row_ != columns_) {
    throw IoError("csv: row with " + std::to_string(in_row_) + " cells, header has " +
                  std::to_string(columns_) + " in '" + path_ + "'");
  }
  out_ << '\n';
  in_row_ = 0;
  if (!out_) {
    throw IoError("csv: write failed on '" + path_ + "'");
  }
}

void Writer::flush() {
  out_.flush();
  if (!out_) {
    throw IoError("csv: flush failed on '" + path_ + "'");
  }
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) {
      return i;
    }
  }
  throw IoError("csv: no column named '" + std::string(name) + "'");
}

namespace {

Row split_line(const std::string& line) {
  Row row;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    row.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') {
    row.emplace_back();
  }
  return row;
}

}  // namespace

Table read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("csv: cannot open '" + path + "'");
  }
  Table table;
  std::string line;
  if (!std::getline(in, line)) {
    throw IoError("csv: '" + path + "' has no header");
  }
  table.header = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    Row row = split_line(line);
    if (row.size() != table.header.size()) {
      throw IoError("csv: ragged row in '" + path + "'");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write(const std::string& path, const Table& table) {
  Writer writer(path, table.header);
  for (const Row& row : table.rows) {
    for (const Cell& c : row) {
      writer.cell(std::string_view(c));
    }
    writer.end_row();
  }
  writer.flush();
}

}  // namespace eoc::csv
