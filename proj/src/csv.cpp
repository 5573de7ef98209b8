#include "clepcast/csv.hpp"

#include <charconv>
#include <cmath>

#include "clepcast/error.hpp"

namespace clepcast::csv {

namespace {

std::string join(const std::vector<std::string>& cols) {
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  return out;
}

}  // namespace

Table parse(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  Table table;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::int64_t line = 1;
  std::int64_t record_line = 1;

  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    const bool blank = record.size() == 1 && record[0].empty() && !field_started;
    if (!blank) {
      if (table.header.empty() && table.rows.empty()) {
        table.header = std::move(record);
      } else {
        table.rows.push_back(std::move(record));
        table.lines.push_back(record_line);
      }
    }
    record.clear();
    field_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorKind::ParseError, "unterminated quoted field", line);
  if (field_started || !field.empty() || !record.empty()) end_record();
  return table;
}

void require_header(const Table& table, std::initializer_list<std::vector<std::string>> accepted,
                    std::string_view source) {
  for (const auto& layout : accepted) {
    if (table.header == layout) return;
  }
  std::string expected;
  for (const auto& layout : accepted) {
    if (!expected.empty()) expected += " | ";
    expected += join(layout);
  }
  throw Error(ErrorKind::SchemaMismatch, std::string(source) + ": header '" + join(table.header) +
                                             "' does not match expected '" + expected + "'");
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw Error(ErrorKind::InvalidArgument, "cannot format value");
  return std::string(buf, ptr);
}

std::int64_t parse_int(std::string_view field, std::int64_t line, std::string_view column) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorKind::ParseError,
                "line " + std::to_string(line) + ", column " + std::string(column) + ": expected integer, got '" +
                    std::string(field) + "'",
                line);
  }
  return v;
}

double parse_double(std::string_view field, std::int64_t line, std::string_view column) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
    throw Error(ErrorKind::ParseError,
                "line " + std::to_string(line) + ", column " + std::string(column) + ": expected number, got '" +
                    std::string(field) + "'",
                line);
  }
  return v;
}

}  // namespace clepcast::csv
