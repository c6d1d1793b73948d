#pragma once

// Small string and file helpers shared by the modules.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace somd {

// Splits on '\n' and drops one trailing '\r' per line. A final newline does
// not produce an extra empty line.
std::vector<std::string_view> split_lines(std::string_view text);
std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);
bool has_whitespace(std::string_view text);
std::string to_lower_ascii(std::string_view text);

// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace somd
