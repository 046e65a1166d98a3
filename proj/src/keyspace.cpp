#include "pstore/keyspace.hpp"

#include <openssl/sha.h>

#include <stdexcept>

#include "pstore/error.hpp"

namespace pstore {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;
}

}  // namespace

Data to_data(std::string_view text) { return Data(text.begin(), text.end()); }

Key Key::from_uint(std::uint64_t value) {
  Bytes b{};
  for (std::size_t i = 0; i < 8; ++i) b[kBytes - 1 - i] = static_cast<std::uint8_t>(value >> (8 * i));
  return Key(b);
}

std::optional<Key> Key::parse_hex(std::string_view hex) {
  if (hex.size() != kBytes * 2) return std::nullopt;
  Bytes b{};
  for (std::size_t i = 0; i < kBytes; ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    b[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return Key(b);
}

Key Key::from_hex(std::string_view hex) {
  auto k = parse_hex(hex);
  if (!k) throw Error(ErrorCode::kInvalidArgument, "key must be 40 lowercase hex characters: " + std::string(hex));
  return *k;
}

Key Key::plus_pow2(std::size_t bit) const {
  Bytes b = bytes_;
  std::size_t idx = kBytes - 1 - bit / 8;
  unsigned carry = 1u << (bit % 8);
  for (std::size_t i = idx + 1; i-- > 0 && carry;) {
    unsigned sum = b[i] + carry;
    b[i] = static_cast<std::uint8_t>(sum);
    carry = sum >> 8;
  }
  return Key(b);
}

std::string Key::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(kBytes * 2, '0');
  for (std::size_t i = 0; i < kBytes; ++i) {
    out[2 * i] = kDigits[bytes_[i] >> 4];
    out[2 * i + 1] = kDigits[bytes_[i] & 0xf];
  }
  return out;
}

std::string_view aid_name(Aid aid) {
  switch (aid) {
    case Aid::kNameDir: return "NAME_DIR";
    case Aid::kVersionDir: return "VERSION_DIR";
    case Aid::kObjectDir: return "OBJECT_DIR";
    case Aid::kDataStore: return "DATA_STORE";
    case Aid::kCodeStore: return "CODE_STORE";
    case Aid::kPolicyStore: return "POLICY_STORE";
  }
  return "?";
}

std::optional<Aid> aid_from_tag(std::uint8_t tag) {
  if (tag < 1 || tag > 6) return std::nullopt;
  return static_cast<Aid>(tag);
}

Key digest(std::span<const std::uint8_t> bytes) {
  Key::Bytes out{};
  SHA1(bytes.data(), bytes.size(), out.data());
  return Key(out);
}

Key digest(std::string_view text) {
  return digest(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Guid GuidAllocator::next() {
  Key::Bytes b{};
  std::size_t filled = 0;
  while (filled < Key::kBytes) {
    std::uint64_t word = rng_();
    for (int i = 0; i < 8 && filled < Key::kBytes; ++i) b[filled++] = static_cast<std::uint8_t>(word >> (56 - 8 * i));
  }
  Key k(b);
  if (!issued_.insert(k).second) throw std::logic_error("GUID collision: " + k.hex());
  return Guid{k};
}

}  // namespace pstore
