#pragma once

#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "cinenet/common.hpp"

namespace cinenet {

// Minimal RFC-4180-style CSV: comma separators, '"' quoting with doubled
// quotes inside quoted fields, one record per line. Reader tolerates CRLF.

inline std::string csv_escape(std::string_view field) {
  bool needs = field.find_first_of(",\"\n") != std::string_view::npos;
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(fields[i]);
  }
  out += '\n';
  return out;
}

/// Splits one CSV record into fields. Throws ParseError on unbalanced quotes.
inline std::vector<std::string> csv_parse_line(std::string_view line, const std::string& context) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          i += 2;
        } else {
          in_quotes = false;
          ++i;
        }
      } else {
        cur += c;
        ++i;
      }
    } else {
      if (c == '"') {
        if (!cur.empty()) throw ParseError(context + ": stray quote inside unquoted field");
        in_quotes = true;
        ++i;
      } else if (c == ',') {
        fields.push_back(std::move(cur));
        cur.clear();
        ++i;
      } else {
        cur += c;
        ++i;
      }
    }
  }
  if (in_quotes) throw ParseError(context + ": unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

/// Line-oriented CSV reader keeping track of line numbers for diagnostics.
class CsvReader {
 public:
  CsvReader(std::istream& in, std::string name) : in_(in), name_(std::move(name)) {}

  /// Reads the next record; returns false at EOF. Skips blank lines.
  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      fields = csv_parse_line(line, context());
      return true;
    }
    return false;
  }

  int line_no() const { return line_no_; }
  std::string context() const { return name_ + ":" + std::to_string(line_no_); }

 private:
  std::istream& in_;
  std::string name_;
  int line_no_ = 0;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write file: " + path);
  out << content;
}

}  // namespace cinenet
