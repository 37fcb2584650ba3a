#ifndef MOSTV_CSV_HPP_
#define MOSTV_CSV_HPP_

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mostv/errors.hpp"

namespace mostv {

// Minimal CSV helpers for the project's own files: no quoting, fields never
// contain commas. Lines starting with '#' are metadata and are skipped on read.

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

struct CsvTable {
  std::vector<std::string> comments;  // leading '#' lines, kept verbatim
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw DataError("missing CSV column: " + name);
  }
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV: " + path);
  CsvTable table;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      table.comments.push_back(line);
      continue;
    }
    if (!header_seen) {
      table.header = split_csv_line(line);
      header_seen = true;
    } else {
      table.rows.push_back(split_csv_line(line));
    }
  }
  return table;
}

}  // namespace mostv

#endif  // MOSTV_CSV_HPP_
