#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hdi/types.hpp"

namespace hdi {

/// Numeric table with a header row. Cells must all parse as doubles;
/// parse failures report the 1-based row and column.
struct CsvTable {
  std::vector<std::string> header;
  Matrix values;  // rows x cols

  Index col(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(std::istream& is, const std::string& source_name = "csv");
CsvTable read_csv_file(const std::string& path);

/// Writes values with 17 significant digits (lossless for doubles).
void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const Matrix& values);

/// Splits a regression table into response y (column named "y") and the
/// remaining predictor columns, preserving their order and names.
struct RegressionData {
  Matrix X;
  Vector y;
  std::vector<std::string> predictor_names;
};

RegressionData split_response(const CsvTable& table);

std::string format_double(double v);  // %.17g

}  // namespace hdi
