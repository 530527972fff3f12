#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hateclf {

// A parsed tab- or comma-separated file. Quoted fields follow RFC 4180
// (doubled quotes, embedded delimiters and newlines) for either delimiter.
struct DelimitedTable {
  char delimiter = '\t';
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based file line where each row starts

  std::optional<std::size_t> column(std::string_view name) const;
};

// Delimiter is taken from the header line: tab if it contains one, else comma.
DelimitedTable read_delimited(const std::filesystem::path& path);
DelimitedTable parse_delimited(std::string_view content);

void write_delimited_row(std::ostream& out, const std::vector<std::string>& fields,
                         char delimiter = '\t');

}  // namespace hateclf
