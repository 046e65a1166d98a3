#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "pstore/error.hpp"
#include "pstore/keyspace.hpp"

namespace pstore {

// Big-endian byte writer used by every on-wire and durable record format.
class ByteWriter {
 public:
  ByteWriter& u8(std::uint8_t v) {
    out_.push_back(v);
    return *this;
  }
  ByteWriter& u32(std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
    return *this;
  }
  ByteWriter& u64(std::uint64_t v) {
    for (int s = 56; s >= 0; s -= 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
    return *this;
  }
  ByteWriter& i64(std::int64_t v) { return u64(static_cast<std::uint64_t>(v)); }
  ByteWriter& key(const Key& k) {
    out_.insert(out_.end(), k.bytes().begin(), k.bytes().end());
    return *this;
  }
  ByteWriter& bytes(std::span<const std::uint8_t> b) {
    u32(static_cast<std::uint32_t>(b.size()));
    out_.insert(out_.end(), b.begin(), b.end());
    return *this;
  }
  ByteWriter& str(std::string_view s) {
    return bytes(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  }
  ByteWriter& raw(std::span<const std::uint8_t> b) {
    out_.insert(out_.end(), b.begin(), b.end());
    return *this;
  }

  Data take() { return std::move(out_); }

 private:
  Data out_;
};

// Reader counterpart; any overrun throws Error(kDecodeError).
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = v << 8 | in_[pos_++];
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = v << 8 | in_[pos_++];
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  Key key() {
    need(Key::kBytes);
    Key::Bytes b{};
    for (auto& x : b) x = in_[pos_++];
    return Key(b);
  }
  Data bytes() {
    std::uint32_t n = u32();
    need(n);
    Data out(in_.begin() + static_cast<std::ptrdiff_t>(pos_), in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return out;
  }
  std::string str() {
    Data b = bytes();
    return std::string(b.begin(), b.end());
  }
  Data rest() {
    Data out(in_.begin() + static_cast<std::ptrdiff_t>(pos_), in_.end());
    pos_ = in_.size();
    return out;
  }

  bool done() const { return pos_ == in_.size(); }
  void expect_done() const {
    if (!done()) throw Error(ErrorCode::kDecodeError, "trailing bytes");
  }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw Error(ErrorCode::kDecodeError, "truncated record");
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace pstore
