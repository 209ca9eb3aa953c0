#pragma once

#include <string>
#include <vector>

namespace capekit {

/// Comma separated table with a mandatory header row. Cells are kept as raw
/// strings; empty cells mean "missing". Decimal point is '.'.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by header name, -1 when absent.
  int column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv_text(const std::string& text, const std::string& origin = "<text>");

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Numeric cell helper: returns NaN for empty cells, throws a data error
/// (with row/column position) for non-numeric content.
double parse_cell(const std::string& cell, size_t row, const std::string& column);

std::string format_double(double v);

}  // namespace capekit
