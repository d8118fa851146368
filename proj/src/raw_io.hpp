#pragma once

// Byte-exact helpers shared by the plant loader and the result writer.

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace psz {

/// Raw 64-bit little-endian doubles, no header.
void write_f64_file(const std::filesystem::path& path, std::span<const double> values);
std::vector<double> read_f64_file(const std::filesystem::path& path);

/// Shortest text that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text, std::string_view what);

}  // namespace psz
