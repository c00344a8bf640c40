#include "elspot/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "elspot/errors.hpp"
#include "elspot/timeutil.hpp"

namespace elspot {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

int CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open CSV file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
  auto header = split_line(line);
  if (header.size() < 2)
    throw ValidationError(path + ": header needs a timestamp and at least one column");

  CsvTable t;
  t.columns.assign(header.begin() + 1, header.end());
  t.values.resize(t.columns.size());

  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = split_line(line);
    if (cells.size() != header.size())
      throw ValidationError(path + " line " + std::to_string(lineno) + ": expected " +
                            std::to_string(header.size()) + " cells, got " +
                            std::to_string(cells.size()));
    t.timestamps.push_back(parse_timestamp(cells[0]));
    for (std::size_t c = 1; c < cells.size(); ++c) {
      char* end = nullptr;
      const double v = std::strtod(cells[c].c_str(), &end);
      if (end == cells[c].c_str())
        throw ValidationError(path + " line " + std::to_string(lineno) +
                              ": bad number in column '" + header[c] + "'");
      t.values[c - 1].push_back(v);
    }
  }
  return t;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write CSV file: " + path);
  out << "timestamp";
  for (const auto& c : table.columns) out << ',' << c;
  out << '\n';
  char buf[40];
  for (std::size_t r = 0; r < table.rows(); ++r) {
    out << format_timestamp(table.timestamps[r]);
    for (const auto& col : table.values) {
      std::snprintf(buf, sizeof(buf), "%.12g", col[r]);
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace elspot
