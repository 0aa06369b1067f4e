#include "ckdprog/common/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ckdprog/common/errors.hpp"

namespace ckdprog::csv {

int Table::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

namespace {

// Splits one logical CSV record starting at pos; advances pos past the
// trailing newline. Records may span physical lines inside quotes.
std::vector<std::string> parse_record(const std::string& text, std::size_t& pos,
                                      int& line, const std::string& origin) {
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  const int start_line = line;
  while (pos < text.size()) {
    const char c = text[pos];
    if (in_quotes) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          field.push_back('"');
          pos += 2;
        } else {
          in_quotes = false;
          ++pos;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
        ++pos;
      }
    } else if (c == '"') {
      if (!field.empty()) {
        throw ValidationError(origin + ": line " + std::to_string(start_line) +
                              ": stray quote inside unquoted field");
      }
      in_quotes = true;
      ++pos;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      ++pos;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
      ++pos;
      ++line;
      fields.push_back(std::move(field));
      return fields;
    } else {
      field.push_back(c);
      ++pos;
    }
  }
  if (in_quotes) {
    throw ValidationError(origin + ": line " + std::to_string(start_line) +
                          ": unterminated quoted field");
  }
  ++line;
  fields.push_back(std::move(field));
  return fields;
}

}  // namespace

Table parse(const std::string& text, const std::string& origin) {
  if (text.empty()) throw ValidationError(origin + ": empty file");
  Table table;
  std::size_t pos = 0;
  int line = 1;
  table.header = parse_record(text, pos, line, origin);
  while (pos < text.size()) {
    const int record_line = line;
    auto fields = parse_record(text, pos, line, origin);
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != table.header.size()) {
      throw ValidationError(origin + ": line " + std::to_string(record_line) + ": expected " +
                            std::to_string(table.header.size()) + " fields, got " +
                            std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  return table;
}

Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

std::string escape(const std::string& field) {
  const bool needs_quotes = field.find_first_of(",\"\n\r") != std::string::npos;
  if (!needs_quotes) return field;
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

std::string format_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out.push_back(',');
    out += escape(fields[i]);
  }
  out.push_back('\n');
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace ckdprog::csv
