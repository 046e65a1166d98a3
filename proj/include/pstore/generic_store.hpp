#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pstore/durable.hpp"
#include "pstore/keyspace.hpp"
#include "pstore/overlay.hpp"

namespace pstore {

class GenericStore;

// What a store needs from the rest of the node population.
class StoreNetwork {
 public:
  virtual ~StoreNetwork() = default;
  /// The home followed by its first width-1 live successors, as known to the
  /// home's routing state.
  virtual std::vector<NodeId> replica_targets(const NodeId& home, std::size_t width) const = 0;
  /// Home node for k as routed from `from`.
  virtual NodeId home_of(const NodeId& from, const Key& k) = 0;
  /// The peer's service object; throws Error(kDeliveryFailure) if it is down.
  virtual GenericStore& peer(const NodeId& node, Aid aid) = 0;
  virtual std::uint64_t next_stamp() = 0;
  virtual std::size_t replication() const = 0;
};

struct StoreEntry {
  Key key;
  EntryKind kind;
  std::vector<Data> items;  // a single value, or the log in append order
};

// The replicated key-value substrate behind every directory service. Calls
// to put/get/update/append/remove act as the key's home: they write locally
// and synchronously to every reachable replica target. Replica copies are
// reconciled last-writer-wins by stamp.
class GenericStore {
 public:
  GenericStore(NodeId self, Aid aid, DurableStore& durable, StoreNetwork& net)
      : self_(self), aid_(aid), durable_(&durable), net_(&net) {}

  /// width 0 means the scenario replication factor.
  void put(const Key& k, const Data& data, std::size_t width = 0);
  Data get(const Key& k);
  Data update(const Key& k, const Data& data);
  void append(const Key& k, const Data& data);
  Data remove(const Key& k);
  std::vector<Data> read_log(const Key& k);
  std::vector<StoreEntry> get_all() const;

  void on_topology_change(const TopologyEvent& event);
  bool repair_pending() const { return pending_; }
  std::size_t upcalls_received() const { return upcalls_; }
  /// Brings every locally held key to its placement; returns the number of
  /// copies written or dropped.
  std::size_t repair();

  // Replica-side operations, invoked by other nodes' stores.
  void accept(const StoredRecord& record);
  std::optional<StoredRecord> peek(const Key& k) const { return durable_->get(k); }

  /// Forget volatile state (node crash). Durable contents are untouched.
  void reset_volatile() { pending_ = false; }
  void rebind(DurableStore& durable) { durable_ = &durable; }

  const NodeId& node() const { return self_; }
  Aid aid() const { return aid_; }
  const DurableStore& durable() const { return *durable_; }

 private:
  std::optional<StoredRecord> current(const Key& k);
  std::size_t width_of(const StoredRecord& r) const;
  void write(StoredRecord record);

  NodeId self_;
  Aid aid_;
  DurableStore* durable_;
  StoreNetwork* net_;
  bool pending_ = false;
  std::size_t upcalls_ = 0;
};

}  // namespace pstore
