#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace adscreen {

inline uint64_t fnv1a64(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ULL) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t fnv1a64(const std::string& s, uint64_t h = 0xcbf29ce484222325ULL) {
  return fnv1a64(s.data(), s.size(), h);
}

uint64_t hash_file(const std::filesystem::path& path);

std::string hash_hex(uint64_t h);

inline constexpr const char* kVersion = "adscreen 1.0.0";

}  // namespace adscreen
