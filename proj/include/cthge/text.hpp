#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cthge {

// Shortest decimal representation that round-trips the exact double.
// Used for every file we emit so identical values always produce
// identical bytes.
std::string fmt_double(double v);

std::vector<std::string_view> split_on(std::string_view line, char sep);

// Strict parsers; `context` names the file/line for error messages.
std::int64_t parse_int(std::string_view field, const std::string& context);
double parse_real(std::string_view field, const std::string& context);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace cthge
