#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace giffluence::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column position by header name.
  std::optional<std::size_t> find(std::string_view name) const;
};

/// Comma-separated with a header row; double quotes may wrap a field. Throws Error{Io}.
Table read(const std::filesystem::path& path);
Table parse(std::string_view text);

/// Empty cell is missing (NaN). nullopt for anything that is not a full number.
std::optional<double> parse_number(std::string_view cell);
/// Shortest representation that round-trips; NaN prints as an empty cell.
std::string format_number(double x);

std::string escape(std::string_view field);

}  // namespace giffluence::csv
