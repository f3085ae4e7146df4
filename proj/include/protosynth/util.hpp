#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace protosynth::util {

std::string read_file(const std::filesystem::path& path);
std::vector<unsigned char> read_binary(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
void write_binary(const std::filesystem::path& path, const std::vector<unsigned char>& bytes);

// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

bool is_identifier(std::string_view s);
bool is_c_reserved(std::string_view s);

std::string trim(std::string_view s);
std::vector<std::string> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool starts_with(std::string_view s, std::string_view prefix);

// Collapses every whitespace run to one space and trims the ends.
std::string normalize_space(std::string_view s);

// Word-wraps `text` so each line plus `prefix` stays within `width` columns.
// A single word longer than the budget gets a line of its own.
std::vector<std::string> wrap_words(std::string_view text, std::size_t width, std::string_view prefix);

// Accepts "300", "300s", "5m", "1500ms", "1h".
std::chrono::milliseconds parse_duration(std::string_view text);
std::string format_seconds(std::chrono::milliseconds d);

}  // namespace protosynth::util
