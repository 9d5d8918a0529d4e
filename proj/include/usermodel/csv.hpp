#pragma once

// Minimal RFC 4180 reader/writer: quoted fields, doubled quotes, CRLF.

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "usermodel/core.hpp"

namespace usermodel {

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == name) return c;
    }
    return std::nullopt;
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace detail

inline RawTable parse_csv(std::istream& in) {
  RawTable table;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_quoted = false;
  bool any_content = false;
  std::size_t line = 1;

  auto finish_field = [&] {
    record.push_back(field_quoted ? field : detail::trim(field));
    field.clear();
    field_quoted = false;
  };
  auto finish_record = [&] {
    finish_field();
    const bool blank = record.size() == 1 && record[0].empty();
    if (!blank) {
      if (table.header.empty()) {
        table.header = std::move(record);
        // Tolerate a UTF-8 byte order mark on the first header cell.
        if (!table.header.empty() && table.header[0].rfind("\xEF\xBB\xBF", 0) == 0) {
          table.header[0].erase(0, 3);
        }
      } else {
        table.rows.push_back(std::move(record));
      }
    }
    record.clear();
    any_content = false;
  };

  char ch;
  while (in.get(ch)) {
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (!detail::trim(field).empty()) {
          throw Error(ErrorKind::Io, "stray quote on line " + std::to_string(line));
        }
        field.clear();
        in_quotes = true;
        field_quoted = true;
        any_content = true;
        break;
      case ',':
        finish_field();
        any_content = true;
        break;
      case '\r':
        break;
      case '\n':
        finish_record();
        ++line;
        break;
      default:
        field.push_back(ch);
        any_content = true;
    }
  }
  if (in_quotes) throw Error(ErrorKind::Io, "unterminated quoted field");
  if (any_content || !field.empty() || !record.empty()) finish_record();
  return table;
}

inline RawTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  return parse_csv(in);
}

inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline void write_csv_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(cells[i]);
  }
  out << '\n';
}

}  // namespace usermodel
