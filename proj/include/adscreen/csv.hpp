#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace adscreen::csv {

// Fields in all pipeline CSVs are plain (no quoting, no embedded commas).
std::vector<std::string> split(const std::string& line, char sep = ',');

std::vector<std::string> read_lines(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& content);

std::string read_text(const std::filesystem::path& path);

// Fixed-format float used in every generated CSV so that reruns are
// byte-identical.
std::string fmt(double v);

double to_double(const std::string& s);
int64_t to_int(const std::string& s);

}  // namespace adscreen::csv
