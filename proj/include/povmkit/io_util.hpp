#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace povmkit {

/// Shortest decimal form that round-trips a double exactly.
std::string fmt_g17(double value);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

/// Splits on '\n', tolerating trailing '\r' (CRLF input).
std::vector<std::string> split_lines(const std::string& text);

std::vector<std::string> split_ws(const std::string& line);

/// Strict double parse of a whole token; returns false on any leftover.
bool parse_double(const std::string& token, double& out);
bool parse_u64(const std::string& token, std::uint64_t& out);

}  // namespace povmkit
