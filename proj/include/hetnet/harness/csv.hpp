#pragma once

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hetnet::harness {

/// Malformed tabular input; `line` is 1-based (0 when not tied to a line).
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// Plain comma-separated table without quoting. Blank lines and lines
/// starting with '#' are skipped; the first remaining line is the header.
class CsvTable {
 public:
  static CsvTable read(std::istream& in, const std::string& source) {
    CsvTable t;
    t.source_ = source;
    std::string line;
    std::size_t number = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
      ++number;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == '#') continue;
      auto fields = split(line);
      if (!have_header) {
        t.header_ = std::move(fields);
        t.header_line_ = number;
        have_header = true;
        continue;
      }
      if (fields.size() != t.header_.size()) {
        throw DataError(source, number,
                        "expected " + std::to_string(t.header_.size()) + " fields, found " +
                            std::to_string(fields.size()));
      }
      t.rows_.push_back({number, std::move(fields)});
    }
    if (!have_header) throw DataError(source, 0, "no header line");
    return t;
  }

  const std::string& source() const { return source_; }
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<CsvRow>& rows() const { return rows_; }

  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t k = 0; k < header_.size(); ++k) {
      if (header_[k] == name) return k;
    }
    return std::nullopt;
  }

  std::size_t column(std::string_view name) const {
    if (auto k = find(name)) return *k;
    throw DataError(source_, header_line_, "missing column '" + std::string(name) + "'");
  }

  /// Numeric field; "nan", "inf" and an empty field (NaN) are accepted.
  double number(const CsvRow& row, std::size_t col) const {
    const auto& text = row.fields.at(col);
    if (text.empty()) return std::numeric_limits<double>::quiet_NaN();
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0' || errno == ERANGE) {
      throw DataError(source_, row.line, "column '" + header_.at(col) + "': '" + text + "' is not a number");
    }
    return v;
  }

 private:
  static std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
  }

  std::string source_;
  std::size_t header_line_ = 0;
  std::vector<std::string> header_;
  std::vector<CsvRow> rows_;
};

/// Writes doubles with enough digits to round-trip, "nan"/"inf" otherwise.
inline void put_number(std::ostream& out, double v) {
  if (std::isnan(v)) {
    out << "nan";
  } else if (std::isinf(v)) {
    out << (v > 0 ? "inf" : "-inf");
  } else {
    std::ostringstream s;
    s.precision(10);
    s << v;
    out << s.str();
  }
}

}  // namespace hetnet::harness
