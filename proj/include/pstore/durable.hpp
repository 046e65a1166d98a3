#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pstore/keyspace.hpp"

namespace pstore {

enum class EntryKind : std::uint8_t { kValue, kAppendLog, kTombstone };

std::string_view entry_kind_name(EntryKind kind);

// One key's durable record. `stamp` orders writes (last writer wins); `width`
// overrides the store's replication factor for this key when non-zero.
// Neither survives a reload from disk: both come back as zero.
struct StoredRecord {
  Key key;
  EntryKind kind = EntryKind::kValue;
  std::vector<Data> items;  // one item for kValue, the log for kAppendLog
  std::uint64_t stamp = 0;
  std::uint8_t width = 0;

  bool live() const { return kind != EntryKind::kTombstone; }
  friend bool operator==(const StoredRecord&, const StoredRecord&) = default;
};

/// True when `a` should replace `b` during replica reconciliation.
bool supersedes(const StoredRecord& a, const StoredRecord& b);

std::string base64_encode(const Data& data);
Data base64_decode(std::string_view text);  // throws kDecodeError

// Per-node, per-service durable storage. Survives node failure; only
// wipe() (disk loss) destroys it. With a file attached, every mutation is
// written to `<file>.tmp` and renamed over the file, so a crash at any point
// leaves either the old or the new contents.
class DurableStore {
 public:
  using CrashHook = std::function<void(std::string_view stage)>;

  DurableStore() = default;
  /// Loads the file if it exists; later mutations are written through.
  explicit DurableStore(std::filesystem::path file);

  std::optional<StoredRecord> get(const Key& key) const;
  void put(StoredRecord record);
  void erase(const Key& key);
  std::vector<StoredRecord> all() const;
  std::size_t size() const { return records_.size(); }
  void wipe();

  const std::optional<std::filesystem::path>& file() const { return file_; }

  /// Test hook invoked at "tmp-partial" and "tmp-complete" while persisting;
  /// throwing from it simulates a crash at that point.
  void set_crash_hook(CrashHook hook) { crash_hook_ = std::move(hook); }

  static std::string format(const std::map<Key, StoredRecord>& records);
  static std::map<Key, StoredRecord> parse(std::string_view text);

 private:
  void persist(const std::map<Key, StoredRecord>& next);

  std::map<Key, StoredRecord> records_;
  std::optional<std::filesystem::path> file_;
  CrashHook crash_hook_;
};

}  // namespace pstore
