#pragma once

// Minimal CSV tables: header row, '\n' line endings, doubles in shortest
// round-trip form, no locale dependence.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "lrbias/error.hpp"
#include "lrbias/format.hpp"

namespace lrbias::experiment {

using CsvCell = std::variant<double, std::int64_t, std::string>;

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<CsvCell>> rows;

  void add(std::vector<CsvCell> row) {
    require(row.size() == columns.size(), ErrorCode::DimensionMismatch,
            "row has " + std::to_string(row.size()) + " cells for " + std::to_string(columns.size()) + " columns");
    rows.push_back(std::move(row));
  }
};

namespace detail {

inline std::string quote_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string format_cell(const CsvCell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return quote_field(std::get<std::string>(c));
}

}  // namespace detail

inline std::string format_csv(const CsvTable& t) {
  std::string out;
  for (std::size_t j = 0; j < t.columns.size(); ++j) {
    if (j) out += ',';
    out += detail::quote_field(t.columns[j]);
  }
  out += '\n';
  for (const auto& row : t.rows) {
    require(row.size() == t.columns.size(), ErrorCode::DimensionMismatch, "row arity differs from schema");
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += detail::format_cell(row[j]);
    }
    out += '\n';
  }
  return out;
}

inline void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::IoError, "cannot write " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  require(!out.fail(), ErrorCode::IoError, "write failed for " + path);
}

inline void write_csv(const CsvTable& t, const std::string& path) { write_text(format_csv(t), path); }

/// Parses CSV text into string fields, honouring quotes.
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    any = true;
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
    }
  }
  require(!quoted, ErrorCode::ParseError, "unterminated quoted field");
  if (any) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace lrbias::experiment
