#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace despso::csv {

/// Shortest-safe round-trip text for a double: 17 significant digits.
std::string format_double(double value);

/// Parses a full field as a double; throws ParseError on trailing garbage.
double parse_double(std::string_view text);

/// Splits one line on commas. No quoting; none of our schemas need it.
std::vector<std::string> split_line(std::string_view line);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Reads a header line and data rows; blank lines are skipped.
Table read_table(std::istream& in);

/// Writes a comma-joined line terminated by '\n'.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace despso::csv
