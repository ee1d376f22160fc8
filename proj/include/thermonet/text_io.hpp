#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace thermonet {

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);

/// Strict parse of a full field; throws std::invalid_argument on garbage.
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

std::vector<std::string_view> split_fields(std::string_view line, char sep = ',');
std::string_view trim(std::string_view text);

/// Reads a whole file; throws std::runtime_error if it cannot be opened.
std::string read_file(const std::string& path);

/// Writes via a temporary sibling and rename so readers never see partial files.
void write_file(const std::string& path, std::string_view contents);

}  // namespace thermonet
