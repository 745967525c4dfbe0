#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "episcale/core/format.hpp"

namespace episcale {

inline constexpr const char* kCsvVersion = "v1";

/// CSV with a versioned first line "# episcale-csv v1 <schema>" followed by
/// the column header. Doubles are written in shortest round-trip form so
/// reruns produce identical bytes.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& schema, std::vector<std::string> columns)
      : out_(path, std::ios::binary), columns_(columns.size()) {
    if (!out_) throw std::runtime_error("cannot write " + path);
    out_ << "# episcale-csv " << kCsvVersion << ' ' << schema << '\n';
    for (std::size_t k = 0; k < columns.size(); ++k) out_ << (k ? "," : "") << columns[k];
    out_ << '\n';
  }

  template <class... Ts>
  void row(const Ts&... values) {
    static_assert(sizeof...(Ts) > 0);
    if (sizeof...(Ts) != columns_) throw std::logic_error("csv row width does not match header");
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(values), first = false), ...);
    out_ << '\n';
  }

  /// Flushes and closes the file; required before digesting it.
  void close() {
    out_.close();
    if (out_.fail()) throw std::runtime_error("csv: write failed");
  }

 private:
  template <class T>
  static std::string cell(const T& v) {
    if constexpr (std::is_floating_point_v<T>) {
      return detail::format_double(static_cast<double>(v));
    } else if constexpr (std::is_arithmetic_v<T>) {
      return std::to_string(v);
    } else {
      return std::string(v);
    }
  }

  std::ofstream out_;
  std::size_t columns_;
};

struct CsvTable {
  std::string schema;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t k = 0; k < columns.size(); ++k) {
      if (columns[k] == name) return k;
    }
    throw std::out_of_range("no column " + name);
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

/// Reads a file written by CsvWriter; rejects missing or unknown versions.
inline CsvTable read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty input");
  std::istringstream head(line);
  std::string hash, magic, version;
  head >> hash >> magic >> version;
  if (hash != "#" || magic != "episcale-csv") throw std::runtime_error("csv: missing version line");
  if (version != kCsvVersion) throw std::runtime_error("csv: unsupported version " + version);
  CsvTable table;
  head >> table.schema;
  if (!std::getline(in, line)) throw std::runtime_error("csv: missing column header");
  table.columns = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    table.rows.push_back(split_csv_line(line));
    if (table.rows.back().size() != table.columns.size())
      throw std::runtime_error("csv: row width does not match header");
  }
  return table;
}

inline CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return read_csv(in);
}

}  // namespace episcale
