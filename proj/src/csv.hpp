#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "socdml/errors.hpp"

namespace socdml::detail {

// Minimal strict CSV: comma-separated, no quoting (the ingest schemas carry
// plain tokens and numbers), '\n' or '\r\n' line endings, UTF-8 passthrough.

inline std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

class CsvFile {
 public:
  CsvFile(const std::string& path, const std::vector<std::string>& header) : path_(path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::io_error, "cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error(errc::missing_column, path + ": empty file, no header");
    strip_cr(line);
    auto cols = split_row(line);
    for (const auto& want : header) {
      bool found = false;
      for (const auto& have : cols)
        if (have == want) found = true;
      if (!found) throw Error(errc::missing_column, path + ": missing column '" + want + "'");
    }
    if (cols != header) {
      std::string expect;
      for (std::size_t i = 0; i < header.size(); ++i) expect += (i ? "," : "") + header[i];
      throw Error(errc::malformed_row, path + ": header must be exactly '" + expect + "'", 1);
    }
    long lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      strip_cr(line);
      if (line.empty()) continue;
      rows_.emplace_back(lineno, split_row(line));
      if (rows_.back().second.size() != header.size())
        throw Error(errc::malformed_row,
                    path + ": expected " + std::to_string(header.size()) + " fields, got " +
                        std::to_string(rows_.back().second.size()),
                    lineno);
    }
  }

  const std::vector<std::pair<long, std::vector<std::string>>>& rows() const { return rows_; }
  const std::string& path() const { return path_; }

 private:
  static void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
  }

  std::string path_;
  std::vector<std::pair<long, std::vector<std::string>>> rows_;
};

inline double parse_double(const std::string& token, const std::string& what, long line) {
  double value = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || token.empty())
    throw Error(errc::malformed_row, "bad " + what + " value '" + token + "'", line);
  return value;
}

inline int parse_int(const std::string& token, const std::string& what, long line) {
  int value = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || token.empty())
    throw Error(errc::malformed_row, "bad " + what + " value '" + token + "'", line);
  return value;
}

}  // namespace socdml::detail
