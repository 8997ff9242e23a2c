#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sctree {

std::vector<std::string> split(std::string_view line, char sep);
std::vector<std::string> split_whitespace(std::string_view line);
std::string_view trim(std::string_view s);

// One entry per line, trailing '\r' removed. Throws Error if unreadable.
std::vector<std::string> read_lines(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Unicode helpers (ICU-backed).
std::string nfd(std::string_view utf8);
std::vector<char32_t> codepoints(std::string_view utf8);

// Fixed-precision number formatting used by every dump so output is byte-stable.
std::string format_cost(double value);

}  // namespace sctree
