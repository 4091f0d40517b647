#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace trialsim {

// One output cell: preformatted text plus enough type information to emit
// valid JSON. Empty text renders as an empty CSV field / JSON null.
struct Cell {
  std::string text;
  bool numeric = false;
};

Cell cell_str(std::string s);
Cell cell_int(long v);
// Fixed decimals; probabilities use four to match the table precision.
Cell cell_num(double v, int decimals = 4);
Cell cell_empty();

// Row-oriented table with a fixed header, written as RFC 4180 CSV (CRLF,
// quoted fields) or as a JSON array of objects.
class TableWriter {
 public:
  explicit TableWriter(std::vector<std::string> columns);

  void add_row(std::vector<Cell> cells);
  void write_csv(std::ostream& out) const;
  void write_json(std::ostream& out) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

}  // namespace trialsim
