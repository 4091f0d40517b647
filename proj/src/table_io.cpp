#include "trialsim/table_io.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace trialsim {

namespace {

bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\r\n") != std::string::npos;
}

std::string csv_field(const std::string& s) {
  if (!needs_quoting(s)) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string json_escaped(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

}  // namespace

Cell cell_str(std::string s) { return {std::move(s), false}; }

Cell cell_int(long v) { return {std::to_string(v), true}; }

Cell cell_num(double v, int decimals) {
  if (!std::isfinite(v)) throw std::invalid_argument("cell_num: non-finite value");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return {buf, true};
}

Cell cell_empty() { return {"", false}; }

TableWriter::TableWriter(std::vector<std::string> columns)
    : columns_(std::move(columns)) {}

void TableWriter::add_row(std::vector<Cell> cells) {
  if (cells.size() != columns_.size()) {
    throw std::invalid_argument("table row width does not match the header");
  }
  rows_.push_back(std::move(cells));
}

void TableWriter::write_csv(std::ostream& out) const {
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (c > 0) out << ',';
    out << csv_field(columns_[c]);
  }
  out << "\r\n";
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out << ',';
      out << csv_field(row[c].text);
    }
    out << "\r\n";
  }
}

void TableWriter::write_json(std::ostream& out) const {
  out << "[\n";
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    out << "  {";
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      if (c > 0) out << ", ";
      out << json_escaped(columns_[c]) << ": ";
      const Cell& cell = rows_[r][c];
      if (cell.text.empty()) {
        out << "null";
      } else if (cell.numeric) {
        out << cell.text;
      } else {
        out << json_escaped(cell.text);
      }
    }
    out << (r + 1 == rows_.size() ? "}\n" : "},\n");
  }
  out << "]\n";
}

}  // namespace trialsim
