#pragma once

// Reference implementations used to check the system under test. They work
// from first principles (sorted vectors, plain maps) and share no code with
// the library beyond the Key type itself.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "pstore/keyspace.hpp"

namespace oracle {

using pstore::Key;

/// First member at or after k clockwise, by linear scan.
inline Key successor(const std::vector<Key>& members, const Key& k) {
  const Key* best = nullptr;
  const Key* lowest = nullptr;
  for (const auto& m : members) {
    if (!lowest || m < *lowest) lowest = &m;
    if (m >= k && (!best || m < *best)) best = &m;
  }
  return best ? *best : *lowest;
}

/// The `width` members clockwise from successor(k), by repeated scans.
inline std::vector<Key> holders(const std::vector<Key>& members, const Key& k, std::size_t width) {
  std::vector<Key> out;
  Key at = successor(members, k);
  while (out.size() < std::min(width, members.size())) {
    out.push_back(at);
    at = successor(members, at.plus_one());
  }
  return out;
}

/// Integer ring membership test written directly from the definition
/// k ∈ (lo, hi] walking clockwise on Z_m.
inline bool walk_in_ring(unsigned k, unsigned lo, unsigned hi, unsigned m) {
  if (lo == hi) return true;
  for (unsigned x = (lo + 1) % m;; x = (x + 1) % m) {
    if (x == k) return true;
    if (x == hi) return false;
  }
}

inline Key random_key(std::mt19937_64& rng) {
  Key::Bytes b{};
  for (auto& byte : b) byte = static_cast<std::uint8_t>(rng());
  return Key(b);
}

inline unsigned ceil_log2(std::size_t n) {
  unsigned bits = 0;
  while ((std::size_t{1} << bits) < n) ++bits;
  return bits;
}

// A fresh directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("pstore-test-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace oracle
