#include "adscreen/config.hpp"

#include "adscreen/csv.hpp"
#include "adscreen/error.hpp"

namespace adscreen::config {

namespace {
std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}
}  // namespace

IniFile IniFile::parse_text(const std::string& text) {
  IniFile ini;
  std::string section;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    std::string line =
        text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
    pos = eol == std::string::npos ? text.size() : eol + 1;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(Errc::BadConfig, "unterminated section: " + line);
      section = trim(line.substr(1, line.size() - 2));
      ini.sections[section];
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) fail(Errc::BadConfig, "expected key = value: " + line);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(Errc::BadConfig, "empty key: " + line);
    ini.sections[section][key] = value;
  }
  return ini;
}

IniFile IniFile::parse_file(const std::filesystem::path& path) {
  return parse_text(csv::read_text(path));
}

bool IniFile::has(const std::string& section, const std::string& key) const {
  auto s = sections.find(section);
  return s != sections.end() && s->second.count(key) > 0;
}

std::string IniFile::get(const std::string& section, const std::string& key,
                         const std::string& fallback) const {
  auto s = sections.find(section);
  if (s == sections.end()) return fallback;
  auto k = s->second.find(key);
  return k == s->second.end() ? fallback : k->second;
}

int64_t IniFile::get_int(const std::string& section, const std::string& key,
                         int64_t fallback) const {
  if (!has(section, key)) return fallback;
  return csv::to_int(get(section, key, ""));
}

double IniFile::get_double(const std::string& section, const std::string& key,
                           double fallback) const {
  if (!has(section, key)) return fallback;
  return csv::to_double(get(section, key, ""));
}

std::string IniFile::canonical() const {
  std::string out;
  for (const auto& [section, kv] : sections) {
    out += "[" + section + "]\n";
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& csv_list) {
  std::vector<int> out;
  for (const auto& item : csv::split(csv_list)) {
    std::string t;
    for (char c : item)
      if (c != ' ' && c != '\t') t.push_back(c);
    if (t.empty()) continue;
    out.push_back(static_cast<int>(csv::to_int(t)));
  }
  return out;
}

}  // namespace adscreen::config
