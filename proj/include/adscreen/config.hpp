#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace adscreen::config {

// Flat "[section] key = value" file with '#' comments.
struct IniFile {
  std::map<std::string, std::map<std::string, std::string>> sections;

  static IniFile parse_file(const std::filesystem::path& path);
  static IniFile parse_text(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  int64_t get_int(const std::string& section, const std::string& key, int64_t fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;

  // canonical serialization (sorted sections/keys) used for config hashing
  std::string canonical() const;
};

std::vector<int> parse_int_list(const std::string& csv_list);

}  // namespace adscreen::config
