#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace elspot {

// A timestamped numeric table: one timestamp column plus named value columns.
struct CsvTable {
  std::vector<std::string> columns;          // value column names
  std::vector<std::int64_t> timestamps;
  std::vector<std::vector<double>> values;   // [column][row]

  std::size_t rows() const { return timestamps.size(); }
  int column_index(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

}  // namespace elspot
