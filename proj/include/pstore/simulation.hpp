#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pstore/durable.hpp"
#include "pstore/generic_store.hpp"
#include "pstore/keyspace.hpp"
#include "pstore/object_model.hpp"
#include "pstore/overlay.hpp"

namespace pstore {

using TxnId = std::string;

enum class DataStrategy { kCoLocated, kLocationRecording };

struct SimulationConfig {
  std::uint64_t seed = 42;
  std::size_t replication = 3;
  // Root directory for file-backed durable stores; in-memory when empty.
  std::optional<std::filesystem::path> durable_dir;
  DataStrategy data_strategy = DataStrategy::kCoLocated;
  std::size_t repositories = 0;  // external repositories for kLocationRecording
};

// Where an instance lives. The incarnation distinguishes a rejoined node's
// fresh heap from the one that died with it.
struct ObjectLocation {
  NodeId node;
  std::uint64_t incarnation = 0;
  std::uint64_t local_id = 0;
  friend auto operator<=>(const ObjectLocation&, const ObjectLocation&) = default;
};

struct Node {
  std::string name;
  NodeId id;
  bool live = false;
  std::uint64_t incarnation = 0;

  std::array<std::unique_ptr<DurableStore>, 6> durable;
  std::array<std::unique_ptr<GenericStore>, 6> stores;

  // Volatile: lost on failure.
  std::map<std::uint64_t, ObjectNode> heap;
  std::uint64_t next_local_id = 1;
  std::set<Guid> dirty;
  std::map<Guid, std::set<TxnId>> txn_ledger;

  GenericStore& store(Aid aid) { return *stores[aid_index(aid)]; }
  const GenericStore& store(Aid aid) const { return *stores[aid_index(aid)]; }
  ObjectNode* find_local(std::uint64_t local_id);
  std::optional<std::uint64_t> local_id_of(const Guid& guid) const;
};

// A storage host outside the overlay, used by the location-recording
// data-store strategy.
struct ExternalRepository {
  std::string name;
  std::unique_ptr<DurableStore> durable;
};

struct StabilizeResult {
  std::size_t routing_rounds = 0;
  std::size_t repaired_copies = 0;
};

struct PlacementCheck {
  std::size_t keys = 0;
  std::size_t violations = 0;
  std::vector<std::string> details;  // first few violations, human readable
};

// The simulated deployment: every node, its six service objects, the overlay
// and the one seeded GUID stream. Single-threaded; everything runs on the
// caller's thread in call order.
class Simulation : public StoreNetwork {
 public:
  explicit Simulation(SimulationConfig config = {});
  ~Simulation() override;
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  const SimulationConfig& config() const { return config_; }

  static NodeId node_id_for(std::string_view name) { return digest("node:" + std::string(name)); }

  /// Boots (or re-boots) the named node. A node that was up before reuses its
  /// durable state. Throws kDuplicate if already live.
  NodeId join(const std::string& name);
  NodeId join(const NodeId& id, const std::string& name);
  /// Crash-stop: volatile state is lost, durable state is kept.
  void fail(const NodeId& id);
  /// Destroys the node's durable state. A live node crashes first.
  void disk_wipe(const NodeId& id);
  StabilizeResult stabilize();
  /// Stops every node and boots all of them again over their durable state
  /// (re-read from disk in directory mode), then stabilizes.
  StabilizeResult restart_all();

  bool has_node(const NodeId& id) const { return nodes_.contains(id); }
  Node& node(const NodeId& id);
  const Node& node(const NodeId& id) const;
  NodeId id_of(std::string_view name) const;  // throws kNotFound
  std::string name_of(const NodeId& id) const;
  std::vector<NodeId> all_nodes() const;
  bool is_live(const NodeId& id) const { return overlay_.is_live(id); }
  /// Lowest live node, in name order.
  NodeId first_live() const;

  /// The node, if reachable; throws kDeliveryFailure otherwise.
  Node& deliver(const NodeId& id);
  ServiceRef dol(const NodeId& from, const Key& k, Aid aid) { return overlay_.dol(from, k, aid); }
  GenericStore& service(const ServiceRef& ref) { return deliver(ref.node).store(ref.aid); }

  Overlay& overlay() { return overlay_; }
  const Overlay& overlay() const { return overlay_; }
  GuidAllocator& guids() { return guids_; }
  ClassRegistry& classes() { return classes_; }
  const ClassRegistry& classes() const { return classes_; }

  std::uint64_t now() const { return now_; }
  void advance_to(std::uint64_t t) { now_ = std::max(now_, t); }
  std::uint64_t tick() { return ++now_; }

  ExternalRepository& repository(std::string_view name);
  std::vector<std::string> repository_names() const;

  // Privileged census, separate from application reads.
  std::map<Key, std::vector<NodeId>> copies(Aid aid) const;
  PlacementCheck check_placement() const;
  /// Nodes that should hold k right now, by the successor rule.
  std::vector<NodeId> expected_holders(const Key& k, std::size_t width) const;

  // StoreNetwork
  std::vector<NodeId> replica_targets(const NodeId& home, std::size_t width) const override;
  NodeId home_of(const NodeId& from, const Key& k) override;
  GenericStore& peer(const NodeId& node, Aid aid) override;
  std::uint64_t next_stamp() override { return ++stamp_; }
  std::size_t replication() const override { return config_.replication; }

 private:
  std::unique_ptr<DurableStore> open_durable(const std::string& node_name, Aid aid) const;
  void clear_volatile(Node& n);

  SimulationConfig config_;
  Overlay overlay_;
  GuidAllocator guids_;
  ClassRegistry classes_;
  std::map<NodeId, Node> nodes_;
  std::map<std::string, ExternalRepository, std::less<>> repositories_;
  std::uint64_t now_ = 0;
  std::uint64_t stamp_ = 0;
};

}  // namespace pstore
