#include "pstore/durable.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>

#include "pstore/error.hpp"

namespace pstore {

std::string_view entry_kind_name(EntryKind kind) {
  switch (kind) {
    case EntryKind::kValue: return "VALUE";
    case EntryKind::kAppendLog: return "APPEND_LOG";
    case EntryKind::kTombstone: return "TOMBSTONE";
  }
  return "?";
}

bool supersedes(const StoredRecord& a, const StoredRecord& b) {
  if (a.stamp != b.stamp) return a.stamp > b.stamp;
  // Equal stamps only arise for records reloaded from disk. Deletions win,
  // then the longer log, then the larger bytes, so every node picks the same.
  if (a.live() != b.live()) return !a.live();
  if (a.items.size() != b.items.size()) return a.items.size() > b.items.size();
  return a.items > b.items;
}

std::string base64_encode(const Data& data) {
  if (data.empty()) return {};
  std::string out(4 * ((data.size() + 2) / 3), '\0');
  int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(), static_cast<int>(data.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

Data base64_decode(std::string_view text) {
  if (text.empty()) return {};
  if (text.size() % 4 != 0) throw Error(ErrorCode::kDecodeError, "base64 length not a multiple of 4");
  Data out(3 * text.size() / 4);
  int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
  if (n < 0) throw Error(ErrorCode::kDecodeError, "invalid base64");
  std::size_t pad = 0;
  if (text.back() == '=') ++pad;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

DurableStore::DurableStore(std::filesystem::path file) : file_(std::move(file)) {
  if (std::filesystem::exists(*file_)) {
    std::ifstream in(*file_, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    records_ = parse(ss.str());
  }
}

std::optional<StoredRecord> DurableStore::get(const Key& key) const {
  auto it = records_.find(key);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

void DurableStore::put(StoredRecord record) {
  if (!file_) {
    Key k = record.key;
    records_[k] = std::move(record);
    return;
  }
  auto next = records_;
  Key k = record.key;
  next[k] = std::move(record);
  persist(next);
  records_ = std::move(next);
}

void DurableStore::erase(const Key& key) {
  if (!records_.contains(key)) return;
  if (!file_) {
    records_.erase(key);
    return;
  }
  auto next = records_;
  next.erase(key);
  persist(next);
  records_ = std::move(next);
}

std::vector<StoredRecord> DurableStore::all() const {
  std::vector<StoredRecord> out;
  out.reserve(records_.size());
  for (const auto& [_, r] : records_) out.push_back(r);
  return out;
}

void DurableStore::wipe() {
  records_.clear();
  if (file_) std::filesystem::remove(*file_);
}

std::string DurableStore::format(const std::map<Key, StoredRecord>& records) {
  std::string out;
  for (const auto& [key, r] : records) {
    auto line = [&](const Data& d) {
      out += key.hex();
      out += '\t';
      out += entry_kind_name(r.kind);
      out += '\t';
      out += base64_encode(d);
      out += '\n';
    };
    if (r.kind == EntryKind::kTombstone) {
      line({});
    } else {
      for (const auto& item : r.items) line(item);
    }
  }
  return out;
}

std::map<Key, StoredRecord> DurableStore::parse(std::string_view text) {
  std::map<Key, StoredRecord> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty()) continue;
    auto t1 = line.find('\t');
    auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos)
      throw Error(ErrorCode::kDecodeError, "durable record line " + std::to_string(line_no) + ": expected 3 fields");
    auto key = Key::parse_hex(line.substr(0, t1));
    if (!key) throw Error(ErrorCode::kDecodeError, "durable record line " + std::to_string(line_no) + ": bad key");
    std::string_view kind_text = line.substr(t1 + 1, t2 - t1 - 1);
    EntryKind kind;
    if (kind_text == "VALUE") kind = EntryKind::kValue;
    else if (kind_text == "APPEND_LOG") kind = EntryKind::kAppendLog;
    else if (kind_text == "TOMBSTONE") kind = EntryKind::kTombstone;
    else throw Error(ErrorCode::kDecodeError, "durable record line " + std::to_string(line_no) + ": bad kind");
    Data data = base64_decode(line.substr(t2 + 1));

    auto [it, fresh] = out.try_emplace(*key);
    StoredRecord& r = it->second;
    if (fresh) {
      r.key = *key;
      r.kind = kind;
    } else if (kind != EntryKind::kAppendLog || r.kind != EntryKind::kAppendLog) {
      throw Error(ErrorCode::kDecodeError, "durable record line " + std::to_string(line_no) + ": duplicate key");
    }
    if (kind != EntryKind::kTombstone) r.items.push_back(std::move(data));
  }
  return out;
}

void DurableStore::persist(const std::map<Key, StoredRecord>& next) {
  const std::string text = format(next);
  std::filesystem::path tmp = *file_;
  tmp += ".tmp";
  std::filesystem::create_directories(file_->parent_path());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(text.data(), static_cast<std::streamsize>(text.size() / 2));
    out.flush();
    if (crash_hook_) crash_hook_("tmp-partial");
    out.write(text.data() + text.size() / 2, static_cast<std::streamsize>(text.size() - text.size() / 2));
    if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + tmp.string());
  }
  if (crash_hook_) crash_hook_("tmp-complete");
  std::filesystem::rename(tmp, *file_);
}

}  // namespace pstore
