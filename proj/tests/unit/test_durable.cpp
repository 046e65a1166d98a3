#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "pstore/durable.hpp"
#include "pstore/error.hpp"

using namespace pstore;
namespace fs = std::filesystem;

namespace {

StoredRecord value(const std::string& key, const std::string& v) {
  return StoredRecord{digest(key), EntryKind::kValue, {to_data(v)}, 0, 0};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Crash {};

}  // namespace

TEST(Base64, Rfc4648Vectors) {
  const std::pair<const char*, const char*> vectors[] = {
      {"", ""}, {"f", "Zg=="}, {"fo", "Zm8="}, {"foo", "Zm9v"}, {"foob", "Zm9vYg=="}, {"fooba", "Zm9vYmE="},
      {"foobar", "Zm9vYmFy"}};
  for (auto [plain, coded] : vectors) {
    EXPECT_EQ(base64_encode(to_data(plain)), coded);
    EXPECT_EQ(base64_decode(coded), to_data(plain));
  }
  EXPECT_THROW(base64_decode("abc"), Error);
}

TEST(Base64, BinaryRoundTrip) {
  std::mt19937_64 rng(1);
  for (int len = 0; len < 70; ++len) {
    Data d(len);
    for (auto& b : d) b = static_cast<std::uint8_t>(rng());
    EXPECT_EQ(base64_decode(base64_encode(d)), d);
  }
}

TEST(DurableFormat, OneLinePerValueOrLogItem) {
  std::map<Key, StoredRecord> recs;
  const Key a = Key::from_uint(1), b = Key::from_uint(2), c = Key::from_uint(3);
  recs[a] = StoredRecord{a, EntryKind::kValue, {to_data("foo")}, 9, 3};
  recs[b] = StoredRecord{b, EntryKind::kAppendLog, {to_data("f"), to_data("fo")}, 4, 0};
  recs[c] = StoredRecord{c, EntryKind::kTombstone, {}, 5, 0};
  const std::string text = DurableStore::format(recs);
  const std::string expect = a.hex() + "\tVALUE\tZm9v\n" + b.hex() + "\tAPPEND_LOG\tZg==\n" + b.hex() +
                             "\tAPPEND_LOG\tZm8=\n" + c.hex() + "\tTOMBSTONE\t\n";
  EXPECT_EQ(text, expect);

  auto back = DurableStore::parse(text);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[a].items, recs[a].items);
  EXPECT_EQ(back[b].items, recs[b].items);
  EXPECT_EQ(back[c].kind, EntryKind::kTombstone);
  // Stamps and widths are not persisted.
  EXPECT_EQ(back[a].stamp, 0u);
  EXPECT_EQ(back[a].width, 0u);
}

TEST(DurableFormat, RejectsMalformedLines) {
  const std::string k = Key::from_uint(1).hex();
  EXPECT_THROW(DurableStore::parse("nonsense\n"), Error);
  EXPECT_THROW(DurableStore::parse(k + "\tBOGUS\tZg==\n"), Error);
  EXPECT_THROW(DurableStore::parse("zz\tVALUE\tZg==\n"), Error);
  EXPECT_THROW(DurableStore::parse(k + "\tVALUE\tZg==\n" + k + "\tVALUE\tZg==\n"), Error);
}

TEST(DurableStore, InMemoryOperations) {
  DurableStore s;
  s.put(value("a", "1"));
  s.put(value("b", "2"));
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(s.get(digest("a"))->items.front(), to_data("1"));
  s.erase(digest("a"));
  EXPECT_FALSE(s.get(digest("a")).has_value());
  s.wipe();
  EXPECT_EQ(s.size(), 0u);
}

TEST(DurableStore, FileSurvivesReopen) {
  oracle::TempDir dir("durable");
  const fs::path file = dir.path() / "n0" / "NAME_DIR.tsv";
  {
    DurableStore s(file);
    s.put(value("a", "alpha"));
    s.put(value("b", "beta"));
    s.erase(digest("b"));
  }
  DurableStore again(file);
  EXPECT_EQ(again.size(), 1u);
  EXPECT_EQ(again.get(digest("a"))->items.front(), to_data("alpha"));
  EXPECT_FALSE(fs::exists(fs::path(file) += ".tmp"));
  again.wipe();
  EXPECT_FALSE(fs::exists(file));
}

TEST(DurableStore, TornWriteLeavesOldContents) {
  oracle::TempDir dir("torn");
  const fs::path file = dir.path() / "store.tsv";
  DurableStore s(file);
  s.put(value("a", "old"));
  const std::string before = slurp(file);

  for (const char* stage : {"tmp-partial", "tmp-complete"}) {
    s.set_crash_hook([&](std::string_view at) {
      if (at == stage) throw Crash{};
    });
    EXPECT_THROW(s.put(value("a", "new")), Crash);
    EXPECT_EQ(slurp(file), before) << stage;
    DurableStore reopened(file);
    EXPECT_EQ(reopened.get(digest("a"))->items.front(), to_data("old")) << stage;
  }

  s.set_crash_hook({});
  s.put(value("a", "new"));
  EXPECT_EQ(DurableStore(file).get(digest("a"))->items.front(), to_data("new"));
}

TEST(Supersedes, StampOrderThenDeterministicTieBreak) {
  StoredRecord a = value("k", "x"), b = value("k", "y");
  a.stamp = 2;
  b.stamp = 1;
  EXPECT_TRUE(supersedes(a, b));
  EXPECT_FALSE(supersedes(b, a));
  a.stamp = b.stamp = 0;
  EXPECT_NE(supersedes(a, b), supersedes(b, a));
  StoredRecord t{digest("k"), EntryKind::kTombstone, {}, 0, 0};
  EXPECT_TRUE(supersedes(t, a));
  EXPECT_FALSE(supersedes(a, t));
}
