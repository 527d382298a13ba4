#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace pslab {

/// Column-oriented table; numeric cells are written in scientific notation
/// with 17 significant digits, text cells verbatim.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
};

std::string format_number(double x);
std::string format_number(long long x);

std::string to_csv(const Table& t);
Table parse_csv(const std::string& text);

/// Writes to a sibling temporary and renames it over `path`, so readers never
/// observe a partial file.
void write_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace pslab
