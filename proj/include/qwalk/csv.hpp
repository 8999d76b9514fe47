#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace qwalk {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Shortest form that round-trips: "%.17g".
std::string format_number(double value);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partial file. Throws std::runtime_error on I/O failure.
void write_csv_atomic(const std::filesystem::path& path, const CsvTable& table);

/// Header row plus numeric rows; every row must match the header width.
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace qwalk
