#pragma once

// Tabular output: CSV (quoted as needed, LF endings) or a JSON array of
// objects. Cells keep their text so both forms are byte-stable.

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mirrorlab/errors.hpp"
#include "mirrorlab/rational.hpp"

namespace mirrorlab {

inline constexpr std::string_view kVersion = "0.1.0";

struct Cell {
  std::string text;
  std::optional<double> number;  // set when JSON should carry a number
  bool integral = false;

  Cell() = default;
  Cell(std::string t) : text(std::move(t)) {}
  Cell(const char* t) : text(t) {}

  static Cell num(double v, int digits = 10) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    Cell c(buf);
    c.number = v;
    return c;
  }
  static Cell integer(long long v) {
    Cell c(std::to_string(v));
    c.number = static_cast<double>(v);
    c.integral = true;
    return c;
  }
  static Cell sig(double v, int digits = 5) {
    Cell c(format_sig(v, digits));
    c.number = v;
    return c;
  }
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw Error("row width does not match the header");
    rows.push_back(std::move(row));
  }

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    throw Error("no column " + std::string(name));
  }
};

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_field(t.columns[i]);
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(row[i].text);
    os << '\n';
  }
}

inline nlohmann::ordered_json table_json(const Table& t) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i].number && row[i].integral) {
        obj[t.columns[i]] = static_cast<long long>(*row[i].number);
      } else if (row[i].number) {
        obj[t.columns[i]] = *row[i].number;
      } else {
        obj[t.columns[i]] = row[i].text;
      }
    }
    arr.push_back(std::move(obj));
  }
  return arr;
}

enum class Format { csv, json };

inline Format parse_format(std::string_view s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw ValidationError("format", "must be csv or json");
}

inline void write_table(std::ostream& os, const Table& t, Format f) {
  if (f == Format::csv) {
    write_csv(os, t);
  } else {
    os << table_json(t).dump(2) << '\n';
  }
}

// Minimal CSV reader for files written by write_csv.
inline Table read_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      rec.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n') {
      rec.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(rec));
      rec.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
      any = true;
    }
  }
  if (any) {
    rec.push_back(std::move(field));
    records.push_back(std::move(rec));
  }
  Table t;
  if (records.empty()) return t;
  t.columns = records.front();
  for (std::size_t r = 1; r < records.size(); ++r) {
    std::vector<Cell> row;
    for (auto& f : records[r]) row.emplace_back(std::move(f));
    t.add(std::move(row));
  }
  return t;
}

}  // namespace mirrorlab
