#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace derail {

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// 64-bit FNV-1a of the file contents, hex encoded.
std::string content_fingerprint(std::string_view bytes);

std::vector<std::string_view> split(std::string_view s, char delim);
std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);

/// Shortest decimal text that parses back to exactly `x`.
std::string format_double(double x);

}  // namespace derail
