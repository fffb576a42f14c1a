#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lungphase {

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
std::string read_file_text(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`, so readers
// never observe a partially written output.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

// Fixed-point decimal with `decimals` digits, "-0.000000" normalized to "0.000000".
std::string format_fixed(double value, int decimals = 6);

// Shortest representation that parses back to the same double.
std::string format_shortest(double value);

// Rounds to the microsecond grid used by every on-disk time format.
double quantize_us(double seconds);

} // namespace lungphase
