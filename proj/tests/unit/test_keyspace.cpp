#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "pstore/error.hpp"
#include "pstore/keyspace.hpp"

using namespace pstore;

TEST(Digest, KnownVectors) {
  // FIPS 180 test vectors, cross-checked with Python's hashlib.sha1.
  EXPECT_EQ(digest("").hex(), "da39a3ee5e6b4b0d3255bfef95601890afd80709");
  EXPECT_EQ(digest("abc").hex(), "a9993e364706816aba3e25717850c26c9cd0d89d");
  EXPECT_EQ(digest("The quick brown fox jumps over the lazy dog").hex(),
            "2fd4e1c67a2d28fced849ee1bb76e7391b93eb12");
}

TEST(Digest, PidIsContentHash) {
  const Data d = to_data("state bytes");
  EXPECT_EQ(generate_pid(d).key, digest("state bytes"));
  EXPECT_EQ(generate_pid(d), generate_pid(to_data("state bytes")));
  EXPECT_NE(generate_pid(d), generate_pid(to_data("state bytez")));
}

TEST(Key, HexRoundTrip) {
  const Key k = digest("abc");
  EXPECT_EQ(Key::from_hex(k.hex()), k);
  EXPECT_EQ(k.hex().size(), 40u);
  EXPECT_FALSE(Key::parse_hex("xyz").has_value());
  EXPECT_FALSE(Key::parse_hex(std::string(40, 'g')).has_value());
  EXPECT_THROW(Key::from_hex("12"), Error);
}

TEST(Key, OrderIsNumeric) {
  EXPECT_LT(Key::from_uint(1), Key::from_uint(2));
  EXPECT_LT(Key::from_uint(255), Key::from_uint(256));
  EXPECT_EQ(Key::from_uint(0).plus_one(), Key::from_uint(1));
  EXPECT_EQ(Key::from_uint(255).plus_one(), Key::from_uint(256));
  EXPECT_EQ(Key::from_uint(1).plus_pow2(8), Key::from_uint(257));
}

TEST(Key, AdditionWrapsModuloRing) {
  const Key max = Key::from_hex(std::string(40, 'f'));
  EXPECT_EQ(max.plus_one(), Key::from_uint(0));
  const Key half = Key::from_hex("8" + std::string(39, '0'));
  EXPECT_EQ(half.plus_pow2(159), Key::from_uint(0));
}

TEST(InRing, ExhaustiveSixBitRing) {
  const unsigned m = 64;
  for (unsigned lo = 0; lo < m; ++lo)
    for (unsigned hi = 0; hi < m; ++hi)
      for (unsigned k = 0; k < m; ++k)
        ASSERT_EQ(in_ring(k, lo, hi), oracle::walk_in_ring(k, lo, hi, m)) << k << " in (" << lo << "," << hi << "]";
}

TEST(InRing, KeysAgreeWithIntegers) {
  for (unsigned lo = 0; lo < 16; ++lo)
    for (unsigned hi = 0; hi < 16; ++hi)
      for (unsigned k = 0; k < 16; ++k)
        ASSERT_EQ(in_ring(Key::from_uint(k), Key::from_uint(lo), Key::from_uint(hi)), in_ring(k, lo, hi));
}

TEST(InRing, OpenIntervalExcludesEnds) {
  for (unsigned lo = 0; lo < 16; ++lo)
    for (unsigned hi = 0; hi < 16; ++hi)
      for (unsigned k = 0; k < 16; ++k) {
        const bool expect = oracle::walk_in_ring(k, lo, hi, 16) && k != hi && k != lo;
        ASSERT_EQ(in_ring_open(k, lo, hi), expect) << k << " in (" << lo << "," << hi << ")";
      }
}

TEST(Aid, TagsRoundTrip) {
  for (Aid a : kAllAids) {
    EXPECT_EQ(aid_from_tag(aid_tag(a)), a);
    EXPECT_FALSE(aid_name(a).empty());
  }
  EXPECT_EQ(aid_tag(Aid::kNameDir), 1);
  EXPECT_EQ(aid_tag(Aid::kPolicyStore), 6);
  EXPECT_FALSE(aid_from_tag(0).has_value());
  EXPECT_FALSE(aid_from_tag(7).has_value());
}

TEST(Guids, SameSeedSameStream) {
  GuidAllocator a(99), b(99), c(100);
  for (int i = 0; i < 50; ++i) {
    const Guid ga = a.next();
    EXPECT_EQ(ga, b.next());
    EXPECT_NE(ga, c.next());
  }
}

TEST(Guids, NoCollisionsAcrossSeeds) {
  std::set<Key> seen;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    GuidAllocator g(seed);
    for (int i = 0; i < 100; ++i) ASSERT_TRUE(seen.insert(g.next().key).second) << "seed " << seed;
  }
  EXPECT_EQ(seen.size(), 100000u);
}

TEST(Guids, DrawnFromMersenneTwisterOutputs) {
  std::mt19937_64 rng(7);
  GuidAllocator g(7);
  const Key k = g.next().key;
  const std::uint64_t w0 = rng(), w1 = rng(), w2 = rng();
  Key::Bytes expect{};
  for (int i = 0; i < 8; ++i) expect[i] = static_cast<std::uint8_t>(w0 >> (56 - 8 * i));
  for (int i = 0; i < 8; ++i) expect[8 + i] = static_cast<std::uint8_t>(w1 >> (56 - 8 * i));
  for (int i = 0; i < 4; ++i) expect[16 + i] = static_cast<std::uint8_t>(w2 >> (56 - 8 * i));
  EXPECT_EQ(k, Key(expect));
}

TEST(Pids, NoCollisionsOverDistinctStates) {
  std::set<Key> seen;
  for (int i = 0; i < 10000; ++i) ASSERT_TRUE(seen.insert(generate_pid(to_data("state-" + std::to_string(i))).key).second);
}
