#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace wilddistort {

/// Minimal RFC 4180 reader: comma separated, optional double-quoted fields
/// with "" escapes, CRLF or LF line ends, first row is the header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by header name, or -1.
  int column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

/// Quotes a field when it contains a comma, quote or line break.
std::string csv_escape(std::string_view field);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace wilddistort
