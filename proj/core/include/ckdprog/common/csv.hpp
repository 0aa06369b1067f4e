#pragma once

#include <string>
#include <vector>

namespace ckdprog::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column_index(const std::string& name) const;  // -1 when absent
};

// Reads an RFC-4180-style CSV file (quoted fields may contain commas and
// doubled quotes). Throws ValidationError with the offending 1-based line
// number on malformed rows, and on an empty file.
Table read_file(const std::string& path);

Table parse(const std::string& text, const std::string& origin);

// Quotes a field only when it needs quoting.
std::string escape(const std::string& field);

std::string format_row(const std::vector<std::string>& fields);

// Doubles are written with max_digits10 precision so values round-trip.
std::string format_double(double v);

void write_file(const std::string& path, const std::string& content);

}  // namespace ckdprog::csv
