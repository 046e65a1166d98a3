#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pstore {

using Data = std::vector<std::uint8_t>;

Data to_data(std::string_view text);

// A position on the 160-bit circular key space. Bytes are big-endian, so the
// lexicographic order of the array is the numeric order of the value.
class Key {
 public:
  static constexpr std::size_t kBytes = 20;
  static constexpr std::size_t kBits = kBytes * 8;
  using Bytes = std::array<std::uint8_t, kBytes>;

  constexpr Key() = default;
  explicit constexpr Key(const Bytes& bytes) : bytes_(bytes) {}

  static Key from_uint(std::uint64_t value);
  static Key from_hex(std::string_view hex);  // throws Error(kInvalidArgument)
  static std::optional<Key> parse_hex(std::string_view hex);

  // this + 2^bit mod 2^160
  Key plus_pow2(std::size_t bit) const;
  Key plus_one() const { return plus_pow2(0); }

  std::string hex() const;
  std::string short_hex() const { return hex().substr(0, 8); }
  const Bytes& bytes() const { return bytes_; }

  friend constexpr auto operator<=>(const Key&, const Key&) = default;

 private:
  Bytes bytes_{};
};

/// True iff k lies in the clockwise half-open interval (lo, hi]. An interval
/// with lo == hi covers the whole ring. T is any totally ordered ring position
/// (Key, or a small unsigned integer for toy rings).
template <typename T>
constexpr bool in_ring(const T& k, const T& lo, const T& hi) {
  if (lo < hi) return lo < k && k <= hi;
  return k > lo || k <= hi;
}

/// Open clockwise interval (lo, hi). (x, x) is the whole ring minus x.
template <typename T>
constexpr bool in_ring_open(const T& k, const T& lo, const T& hi) {
  if (lo < hi) return lo < k && k < hi;
  return k != lo && (k > lo || k < hi);
}

struct Guid {
  Key key;
  friend constexpr auto operator<=>(const Guid&, const Guid&) = default;
  std::string hex() const { return key.hex(); }
};

struct Pid {
  Key key;
  friend constexpr auto operator<=>(const Pid&, const Pid&) = default;
  std::string hex() const { return key.hex(); }
};

// The six service categories hosted on every node.
enum class Aid : std::uint8_t {
  kNameDir = 1,
  kVersionDir = 2,
  kObjectDir = 3,
  kDataStore = 4,
  kCodeStore = 5,
  kPolicyStore = 6,
};

inline constexpr std::array<Aid, 6> kAllAids = {Aid::kNameDir,   Aid::kVersionDir, Aid::kObjectDir,
                                                Aid::kDataStore, Aid::kCodeStore,  Aid::kPolicyStore};

constexpr std::uint8_t aid_tag(Aid aid) { return static_cast<std::uint8_t>(aid); }
constexpr std::size_t aid_index(Aid aid) { return static_cast<std::size_t>(aid) - 1; }
std::string_view aid_name(Aid aid);
std::optional<Aid> aid_from_tag(std::uint8_t tag);

/// SHA-1 of the bytes, as a Key.
Key digest(std::span<const std::uint8_t> bytes);
Key digest(std::string_view text);

/// Content hash of serialized state.
inline Pid generate_pid(std::span<const std::uint8_t> data) { return Pid{digest(data)}; }

// Draws GUIDs from a single seeded stream. std::mt19937_64 output is fixed by
// the standard, so identities are reproducible across platforms.
class GuidAllocator {
 public:
  explicit GuidAllocator(std::uint64_t seed) : rng_(seed) {}

  /// Throws std::logic_error on a collision with an earlier allocation.
  Guid next();

  std::size_t allocated() const { return issued_.size(); }

 private:
  std::mt19937_64 rng_;
  std::set<Key> issued_;
};

}  // namespace pstore

template <>
struct std::hash<pstore::Key> {
  std::size_t operator()(const pstore::Key& k) const noexcept {
    std::size_t h = 0;
    for (std::size_t i = 0; i < sizeof(std::size_t); ++i) h = (h << 8) | k.bytes()[i];
    return h;
  }
};
