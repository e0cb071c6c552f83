#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace fms {

//! Shortest decimal text that parses back to exactly v.
std::string format_double(double v);
std::optional<double> parse_double(std::string_view s);
std::string_view trim(std::string_view s);

//! Writes to a temporary sibling and renames it over `path`, so readers never see partial output.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);

}  // namespace fms
