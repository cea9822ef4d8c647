// File and hashing helpers for tests that do not link the library.
#pragma once

#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <string_view>

namespace oracle {

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t file_fnv1a64(const std::filesystem::path& p) {
  std::FILE* f = std::fopen(p.c_str(), "rb");
  std::uint64_t h = 14695981039346656037ULL;
  if (!f) return 0;
  int c;
  while ((c = std::fgetc(f)) != EOF) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  std::fclose(f);
  return h;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::string out;
  std::FILE* f = std::fopen(p.c_str(), "rb");
  if (!f) return out;
  char buf[1 << 16];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
  std::fclose(f);
  return out;
}

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto base = std::filesystem::temp_directory_path() / ("malstone-test-" + std::to_string(::getpid()));
  auto p = base / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace oracle
