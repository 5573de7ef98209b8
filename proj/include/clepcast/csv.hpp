#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace clepcast::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::int64_t> lines;  // 1-based source line of each row
};

// RFC-4180-ish: quoted fields, doubled quotes, CRLF tolerated, leading BOM stripped.
Table parse(std::string_view text);

// Throws SchemaMismatch unless the header equals one of the accepted layouts.
void require_header(const Table& table, std::initializer_list<std::vector<std::string>> accepted,
                    std::string_view source);

std::string escape(std::string_view field);

// Shortest representation that parses back to the same double.
std::string format_double(double value);

std::int64_t parse_int(std::string_view field, std::int64_t line, std::string_view column);
double parse_double(std::string_view field, std::int64_t line, std::string_view column);

}  // namespace clepcast::csv
