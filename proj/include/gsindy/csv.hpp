#pragma once

// Minimal numeric CSV: one header row of column names, then rows of finite
// or non-finite decimal numbers. Blank lines are skipped.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gsindy::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::optional<std::size_t> column(std::string_view name) const;
  /// Throws ParseError naming the missing column.
  std::size_t require_column(std::string_view name) const;
  std::vector<double> values(std::size_t col) const;
};

Table read(std::istream& is, std::string_view source = "<stream>");
Table read(const std::filesystem::path& path);

/// Shortest round-trip decimal form of `value`.
std::string format_number(double value);

void write_row(std::ostream& os, const std::vector<std::string>& cells);
void write_row(std::ostream& os, const std::vector<double>& values);

std::vector<std::string> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

}  // namespace gsindy::csv
