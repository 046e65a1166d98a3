#include "pstore/generic_store.hpp"

#include <algorithm>

#include "pstore/error.hpp"

namespace pstore {

namespace {

Error not_found(const Key& k) { return Error(ErrorCode::kNotFound, "no entry for key " + k.hex()); }
Error wrong_kind(const Key& k, EntryKind kind) {
  return Error(ErrorCode::kWrongKind, "key " + k.hex() + " holds " + std::string(entry_kind_name(kind)));
}

}  // namespace

std::size_t GenericStore::width_of(const StoredRecord& r) const {
  return r.width ? r.width : net_->replication();
}

std::optional<StoredRecord> GenericStore::current(const Key& k) {
  if (auto local = durable_->get(k)) return local;
  // Post-failure window: this node may have just become home and not been
  // repaired yet. Ask the nodes that would hold replicas.
  std::optional<StoredRecord> best;
  for (const auto& t : net_->replica_targets(self_, net_->replication() + 1)) {
    if (t == self_) continue;
    try {
      auto r = net_->peer(t, aid_).peek(k);
      if (r && (!best || supersedes(*r, *best))) best = std::move(r);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDeliveryFailure) throw;
    }
  }
  if (best) durable_->put(*best);
  return best;
}

void GenericStore::write(StoredRecord record) {
  record.stamp = net_->next_stamp();
  durable_->put(record);
  for (const auto& t : net_->replica_targets(self_, width_of(record))) {
    if (t == self_) continue;
    try {
      net_->peer(t, aid_).accept(record);
    } catch (const Error& e) {
      // Unreachable replica: under-replication is repaired at the next stabilize.
      if (e.code() != ErrorCode::kDeliveryFailure) throw;
    }
  }
}

void GenericStore::put(const Key& k, const Data& data, std::size_t width) {
  auto cur = current(k);
  if (cur && cur->kind == EntryKind::kAppendLog) throw wrong_kind(k, cur->kind);
  std::uint8_t w = static_cast<std::uint8_t>(std::min<std::size_t>(width, 255));
  if (cur && cur->live()) w = std::max(w, cur->width);
  write(StoredRecord{k, EntryKind::kValue, {data}, 0, w});
}

Data GenericStore::get(const Key& k) {
  auto cur = current(k);
  if (!cur || !cur->live()) throw not_found(k);
  if (cur->kind != EntryKind::kValue) throw wrong_kind(k, cur->kind);
  return cur->items.front();
}

std::vector<Data> GenericStore::read_log(const Key& k) {
  auto cur = current(k);
  if (!cur || !cur->live()) throw not_found(k);
  if (cur->kind != EntryKind::kAppendLog) throw wrong_kind(k, cur->kind);
  return cur->items;
}

Data GenericStore::update(const Key& k, const Data& data) {
  auto cur = current(k);
  if (!cur || !cur->live()) throw not_found(k);
  if (cur->kind != EntryKind::kValue) throw wrong_kind(k, cur->kind);
  Data previous = cur->items.front();
  write(StoredRecord{k, EntryKind::kValue, {data}, 0, cur->width});
  return previous;
}

void GenericStore::append(const Key& k, const Data& data) {
  auto cur = current(k);
  if (cur && cur->kind == EntryKind::kValue) throw wrong_kind(k, cur->kind);
  StoredRecord next{k, EntryKind::kAppendLog, {}, 0, 0};
  if (cur && cur->live()) {
    next.items = std::move(cur->items);
    next.width = cur->width;
  }
  next.items.push_back(data);
  write(std::move(next));
}

Data GenericStore::remove(const Key& k) {
  auto cur = current(k);
  if (!cur || !cur->live()) throw not_found(k);
  Data last = cur->items.back();
  write(StoredRecord{k, EntryKind::kTombstone, {}, 0, cur->width});
  return last;
}

std::vector<StoreEntry> GenericStore::get_all() const {
  std::vector<StoreEntry> out;
  for (auto& r : durable_->all())
    if (r.live()) out.push_back(StoreEntry{r.key, r.kind, std::move(r.items)});
  return out;
}

void GenericStore::on_topology_change(const TopologyEvent&) {
  pending_ = true;
  ++upcalls_;
}

void GenericStore::accept(const StoredRecord& record) {
  auto local = durable_->get(record.key);
  if (local && !supersedes(record, *local)) return;
  durable_->put(record);
}

std::size_t GenericStore::repair() {
  pending_ = false;
  std::size_t moved = 0;
  for (const auto& held : durable_->all()) {
    const NodeId home = net_->home_of(self_, held.key);
    const auto targets = net_->replica_targets(home, width_of(held));

    StoredRecord newest = held;
    std::vector<std::pair<NodeId, std::optional<StoredRecord>>> seen;
    for (const auto& t : targets) {
      if (t == self_) continue;
      try {
        auto r = net_->peer(t, aid_).peek(held.key);
        if (r && supersedes(*r, newest)) newest = *r;
        seen.emplace_back(t, std::move(r));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDeliveryFailure) throw;
      }
    }
    newest.width = std::max(newest.width, held.width);

    bool keep = false;
    for (const auto& t : targets) {
      if (t == self_) {
        keep = true;
        if (supersedes(newest, held)) {
          durable_->put(newest);
          ++moved;
        }
      }
    }
    for (const auto& [t, copy] : seen) {
      if (!copy || supersedes(newest, *copy)) {
        net_->peer(t, aid_).accept(newest);
        ++moved;
      }
    }
    if (!keep) {
      durable_->erase(held.key);
      ++moved;
    }
  }
  return moved;
}

}  // namespace pstore
