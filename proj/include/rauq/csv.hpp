#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rauq/error.hpp"

namespace rauq::csv {

inline void write_field(std::ostream& out, std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

inline void write_row(std::ostream& out, std::initializer_list<std::string_view> fields) {
  bool first = true;
  for (auto f : fields) {
    if (!first) out << ',';
    first = false;
    write_field(out, f);
  }
  out << '\n';
}

inline void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    write_field(out, fields[i]);
  }
  out << '\n';
}

// RFC 4180 field splitting for one physical line (no embedded newlines).
inline std::vector<std::string> split_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw FormatError(line_no, "unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

// A header-addressed table read fully into memory.
class Table {
 public:
  static Table read(std::istream& in, std::string_view source) {
    Table t;
    t.source_ = std::string(source);
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      auto fields = split_line(line, line_no);
      if (!have_header) {
        for (std::size_t i = 0; i < fields.size(); ++i) t.columns_[fields[i]] = i;
        t.width_ = fields.size();
        have_header = true;
        continue;
      }
      if (fields.size() != t.width_) {
        throw FormatError(line_no, t.source_ + ": expected " + std::to_string(t.width_) + " fields, got " +
                                       std::to_string(fields.size()));
      }
      t.rows_.push_back(std::move(fields));
      t.lines_.push_back(line_no);
    }
    if (!have_header) throw FormatError(0, t.source_ + ": missing header row");
    return t;
  }

  std::size_t column(const std::string& name) const {
    auto it = columns_.find(name);
    if (it == columns_.end()) throw FormatError(1, source_ + ": missing column \"" + name + "\"");
    return it->second;
  }

  bool has_column(const std::string& name) const { return columns_.count(name) != 0; }

  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }
  std::size_t line_of(std::size_t row) const { return lines_[row]; }
  const std::string& source() const noexcept { return source_; }

 private:
  std::string source_;
  std::unordered_map<std::string, std::size_t> columns_;
  std::size_t width_ = 0;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::size_t> lines_;
};

}  // namespace rauq::csv
