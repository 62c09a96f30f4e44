#include "hdi/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace hdi {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string tok;
  std::stringstream ss(line);
  while (std::getline(ss, tok, ',')) fields.push_back(tok);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

}  // namespace

Index CsvTable::col(const std::string& name) const {
  for (size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) return static_cast<Index>(j);
  }
  return -1;
}

CsvTable read_csv(std::istream& is, const std::string& source_name) {
  std::string line;
  if (!std::getline(is, line)) {
    throw InputError(source_name + ": empty input, expected a header row");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  CsvTable table;
  table.header = split_fields(line);
  const size_t ncol = table.header.size();
  if (ncol == 0) throw InputError(source_name + ": empty header row");

  std::vector<double> cells;
  Index nrow = 0;
  Index lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != ncol) {
      throw InputError(source_name + ": row " + std::to_string(lineno) +
                       " has " + std::to_string(fields.size()) +
                       " fields, expected " + std::to_string(ncol));
    }
    for (size_t j = 0; j < ncol; ++j) {
      const std::string& f = fields[j];
      char* end = nullptr;
      double v = std::strtod(f.c_str(), &end);
      if (f.empty() || end != f.c_str() + f.size()) {
        throw InputError(source_name + ": non-numeric cell at row " +
                         std::to_string(lineno) + ", column " +
                         std::to_string(j + 1) + " ('" + f + "')");
      }
      cells.push_back(v);
    }
    ++nrow;
  }
  table.values.resize(nrow, static_cast<Index>(ncol));
  for (Index i = 0; i < nrow; ++i) {
    for (Index j = 0; j < static_cast<Index>(ncol); ++j) {
      table.values(i, j) = cells[static_cast<size_t>(i * ncol + j)];
    }
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open input file: " + path);
  return read_csv(is, path);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const Matrix& values) {
  for (size_t j = 0; j < header.size(); ++j) {
    os << (j ? "," : "") << header[j];
  }
  os << "\n";
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      os << (j ? "," : "") << format_double(values(i, j));
    }
    os << "\n";
  }
}

RegressionData split_response(const CsvTable& table) {
  Index yc = table.col("y");
  if (yc < 0) {
    throw InputError("input table must contain a response column named 'y'");
  }
  RegressionData data;
  data.y = table.values.col(yc);
  const Index p = table.values.cols() - 1;
  if (p < 1) throw InputError("input table has no predictor columns");
  data.X.resize(table.values.rows(), p);
  Index out = 0;
  for (Index j = 0; j < table.values.cols(); ++j) {
    if (j == yc) continue;
    data.X.col(out) = table.values.col(j);
    data.predictor_names.push_back(table.header[static_cast<size_t>(j)]);
    ++out;
  }
  return data;
}

}  // namespace hdi
