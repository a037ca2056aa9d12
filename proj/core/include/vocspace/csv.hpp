#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace vocspace::csv {

// Plain comma-separated values: no quoting, no embedded commas. Every file
// this project reads or writes follows that restriction.
std::vector<std::string_view> split(std::string_view line, char sep = ',');

// Reads a line, stripping a trailing '\r'. Returns false at end of stream.
bool read_line(std::istream& in, std::string& line);

// Shortest round-trip representation of a double, locale independent.
std::string format(double value);

double parse_double(std::string_view field, std::string_view what,
                    std::size_t line_no);
std::int64_t parse_int(std::string_view field, std::string_view what,
                       std::size_t line_no);

// Throws InputError when the file is missing or unreadable.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// A parsed header plus rows, with lookup by column name.
class Table {
 public:
  static Table parse(std::istream& in, const std::filesystem::path& origin);
  static Table load(const std::filesystem::path& path);

  std::size_t column(std::string_view name) const;  // throws if missing
  bool has_column(std::string_view name) const;
  const std::vector<std::string>& header() const { return header_; }
  std::size_t size() const { return rows_.size(); }
  const std::vector<std::string>& row(std::size_t i) const { return rows_[i]; }
  // Physical line number of row i (header is line 1).
  std::size_t line_of(std::size_t i) const { return lines_[i]; }
  const std::string& origin() const { return origin_; }

 private:
  std::string origin_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::size_t> lines_;
};

}  // namespace vocspace::csv
