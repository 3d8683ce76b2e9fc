#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace coupdate {

// Shortest decimal form that parses back to the same double.
std::string format_number(double value);

using CsvRow = std::vector<std::string>;

// Minimal reader for the unquoted CSV files this project writes.
std::vector<CsvRow> read_csv(const std::filesystem::path& path);

}  // namespace coupdate
