#pragma once

// CSV ingestion: comma-separated, one header row, double-quoted fields with
// "" escapes, LF or CRLF line ends.

#include <Eigen/Dense>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "potbayes/error.hpp"

namespace potbayes::io {

enum class NaPolicy { kError, kDrop };

inline NaPolicy na_policy_from_string(const std::string& s) {
  if (s == "error") return NaPolicy::kError;
  if (s == "drop" || s == "drop-with-warning") return NaPolicy::kDrop;
  throw InvalidArgument("unknown na policy '" + s + "' (error|drop)");
}

inline const char* to_string(NaPolicy p) { return p == NaPolicy::kError ? "error" : "drop"; }

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_of_row;  // 1-based physical line where the row starts
};

namespace detail {

inline bool valid_utf8(const std::string& s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || i + len > s.size()) return false;
    for (std::size_t j = 1; j < len; ++j) {
      if ((static_cast<unsigned char>(s[i + j]) >> 6) != 0x2) return false;
    }
    i += len;
  }
  return true;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline CsvTable parse_csv(const std::string& text, const std::string& source = "input") {
  if (!detail::valid_utf8(text)) throw DataError(source + ": file is not valid UTF-8", "load_error");
  CsvTable t;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, field_started = false, any = false;
  std::size_t line = 1, rec_line = 1;
  auto end_field = [&] {
    rec.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = rec.size() == 1 && rec[0].empty();
    if (!blank || !t.header.empty()) {
      if (t.header.empty()) {
        t.header = rec;
      } else {
        t.rows.push_back(rec);
        t.line_of_row.push_back(rec_line);
      }
    }
    rec.clear();
    rec_line = line;
    any = false;
  };
  std::size_t i = text.rfind("\xEF\xBB\xBF", 0) == 0 ? 3 : 0;  // byte-order mark
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !detail::trim(field).empty()) {
          throw DataError(source + ": stray quote on line " + std::to_string(line), "load_error");
        }
        field.clear();
        quoted = true;
        field_started = true;
        any = true;
        break;
      case ',':
        end_field();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        ++line;
        end_record();
        break;
      default:
        field += c;
        field_started = true;
        any = true;
    }
  }
  if (quoted) throw DataError(source + ": unterminated quoted field", "load_error");
  if (any || !field.empty()) end_record();
  if (t.header.empty()) throw DataError(source + ": empty file", "load_error");
  // trailing blank lines are layout, not missing values
  while (!t.rows.empty() && t.rows.back().size() == 1 && t.rows.back()[0].empty()) {
    t.rows.pop_back();
    t.line_of_row.pop_back();
  }
  return t;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'", "load_error");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Column by header name, or by 1-based index when the selector is all
/// digits. An empty selector picks the first column.
inline std::size_t select_column(const CsvTable& t, const std::string& selector, const std::string& source) {
  if (selector.empty()) return 0;
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (detail::trim(t.header[j]) == selector) return j;
  }
  if (selector.find_first_not_of("0123456789") == std::string::npos) {
    const std::size_t idx = std::stoul(selector);
    if (idx >= 1 && idx <= t.header.size()) return idx - 1;
  }
  throw DataError(source + ": no column '" + selector + "'", "load_error");
}

inline bool parse_number(const std::string& raw, double& out) {
  const std::string s = detail::trim(raw);
  if (s.empty()) return false;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (*b == '+') ++b;
  const auto r = std::from_chars(b, e, out);
  return r.ec == std::errc() && r.ptr == e && std::isfinite(out);
}

struct SeriesLoad {
  std::vector<double> values;
  std::string column;
  std::size_t dropped = 0;
  std::vector<std::string> warnings;
};

struct LoadOptions {
  std::string column;
  NaPolicy na_policy = NaPolicy::kError;
  std::size_t min_rows = 10;
};

inline SeriesLoad series_from_table(const CsvTable& t, const LoadOptions& opts, const std::string& source) {
  const std::size_t j = select_column(t, opts.column, source);
  SeriesLoad out;
  out.column = detail::trim(t.header[j]);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    double v = 0.0;
    const std::string cell = j < t.rows[r].size() ? t.rows[r][j] : std::string();
    if (parse_number(cell, v)) {
      out.values.push_back(v);
      continue;
    }
    std::ostringstream os;
    os << source << ": row " << (r + 1) << " (line " << t.line_of_row[r] << ") of column '" << out.column
       << "' is not numeric: '" << cell << "'";
    if (opts.na_policy == NaPolicy::kError) throw DataError(os.str(), "load_error");
    ++out.dropped;
    out.warnings.push_back(os.str() + "; dropped");
  }
  if (out.values.empty()) throw DataError(source + ": column '" + out.column + "' has no numeric values", "load_error");
  if (out.values.size() < opts.min_rows) {
    std::ostringstream os;
    os << source << ": column '" << out.column << "' has " << out.values.size() << " usable rows, need at least "
       << opts.min_rows;
    throw DataError(os.str(), "load_error");
  }
  return out;
}

inline SeriesLoad ingest_csv(const std::string& path, const LoadOptions& opts = {}) {
  return series_from_table(parse_csv(read_file(path), path), opts, path);
}

/// Every column numeric; used for exogenous regressors.
inline Eigen::MatrixXd ingest_matrix(const std::string& path) {
  const auto t = parse_csv(read_file(path), path);
  if (t.rows.empty()) throw DataError(path + ": no data rows", "load_error");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.rows[r].size() != t.header.size()) {
      throw DataError(path + ": line " + std::to_string(t.line_of_row[r]) + " has " +
                          std::to_string(t.rows[r].size()) + " fields, header has " + std::to_string(t.header.size()),
                      "load_error");
    }
    for (std::size_t c = 0; c < t.header.size(); ++c) {
      double v = 0.0;
      if (!parse_number(t.rows[r][c], v)) {
        throw DataError(path + ": line " + std::to_string(t.line_of_row[r]) + " column " + std::to_string(c + 1) +
                            " is not numeric",
                        "load_error");
      }
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return m;
}

}  // namespace potbayes::io
