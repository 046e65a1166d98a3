#include "pstore/simulation.hpp"

#include <algorithm>

#include "pstore/error.hpp"

namespace pstore {

ObjectNode* Node::find_local(std::uint64_t local_id) {
  auto it = heap.find(local_id);
  return it == heap.end() ? nullptr : &it->second;
}

std::optional<std::uint64_t> Node::local_id_of(const Guid& guid) const {
  for (const auto& [id, obj] : heap)
    if (obj.guid == guid) return id;
  return std::nullopt;
}

Simulation::Simulation(SimulationConfig config)
    : config_(std::move(config)),
      overlay_(std::max<std::size_t>(3, config_.replication)),
      guids_(config_.seed) {
  if (config_.replication == 0) throw Error(ErrorCode::kInvalidArgument, "replication factor must be at least 1");
  overlay_.set_upcall([this](const NodeId& recipient, const TopologyEvent& ev) {
    auto it = nodes_.find(recipient);
    if (it == nodes_.end()) return;
    for (auto& store : it->second.stores) store->on_topology_change(ev);
  });
  for (std::size_t i = 0; i < config_.repositories; ++i) {
    ExternalRepository repo{"repo" + std::to_string(i), nullptr};
    if (config_.durable_dir) {
      auto dir = *config_.durable_dir / "repositories";
      std::filesystem::create_directories(dir);
      repo.durable = std::make_unique<DurableStore>(dir / (repo.name + ".tsv"));
    } else {
      repo.durable = std::make_unique<DurableStore>();
    }
    repositories_.emplace(repo.name, std::move(repo));
  }
}

Simulation::~Simulation() = default;

std::unique_ptr<DurableStore> Simulation::open_durable(const std::string& node_name, Aid aid) const {
  if (!config_.durable_dir) return std::make_unique<DurableStore>();
  auto dir = *config_.durable_dir / node_name;
  std::filesystem::create_directories(dir);
  return std::make_unique<DurableStore>(dir / (std::string(aid_name(aid)) + ".tsv"));
}

NodeId Simulation::join(const std::string& name) { return join(node_id_for(name), name); }

NodeId Simulation::join(const NodeId& id, const std::string& name) {
  if (overlay_.is_live(id)) throw Error(ErrorCode::kDuplicate, "node already live: " + name);
  auto it = nodes_.find(id);
  if (it == nodes_.end()) {
    Node n;
    n.name = name.empty() ? id.short_hex() : name;
    n.id = id;
    it = nodes_.emplace(id, std::move(n)).first;
    Node& node = it->second;
    for (Aid aid : kAllAids) {
      node.durable[aid_index(aid)] = open_durable(node.name, aid);
      node.stores[aid_index(aid)] = std::make_unique<GenericStore>(id, aid, *node.durable[aid_index(aid)], *this);
    }
  }
  Node& node = it->second;
  ++node.incarnation;
  node.live = true;
  try {
    overlay_.join(id);
  } catch (...) {
    node.live = false;
    throw;
  }
  return id;
}

void Simulation::clear_volatile(Node& n) {
  n.heap.clear();
  n.dirty.clear();
  n.txn_ledger.clear();
  for (auto& s : n.stores) s->reset_volatile();
}

void Simulation::fail(const NodeId& id) {
  overlay_.fail(id);
  Node& n = node(id);
  n.live = false;
  clear_volatile(n);
}

void Simulation::disk_wipe(const NodeId& id) {
  Node& n = node(id);
  if (n.live) fail(id);
  for (auto& d : n.durable) d->wipe();
}

StabilizeResult Simulation::stabilize() {
  StabilizeResult result;
  result.routing_rounds = overlay_.stabilize();
  std::vector<GenericStore*> pending;
  for (auto& [id, n] : nodes_) {
    if (!n.live) continue;
    for (auto& s : n.stores)
      if (s->repair_pending()) pending.push_back(s.get());
  }
  for (int pass = 0; pass < 16; ++pass) {
    std::size_t moved = 0;
    for (auto* s : pending) moved += s->repair();
    result.repaired_copies += moved;
    if (moved == 0) break;
  }
  return result;
}

StabilizeResult Simulation::restart_all() {
  overlay_ = Overlay(std::max<std::size_t>(3, config_.replication));
  overlay_.set_upcall([this](const NodeId& recipient, const TopologyEvent& ev) {
    auto it = nodes_.find(recipient);
    if (it == nodes_.end()) return;
    for (auto& store : it->second.stores) store->on_topology_change(ev);
  });
  for (auto& [id, n] : nodes_) {
    n.live = false;
    clear_volatile(n);
    if (config_.durable_dir) {
      for (Aid aid : kAllAids) {
        auto fresh = open_durable(n.name, aid);
        n.stores[aid_index(aid)]->rebind(*fresh);
        n.durable[aid_index(aid)] = std::move(fresh);
      }
    }
  }
  for (auto& [name, repo] : repositories_) {
    if (repo.durable->file()) repo.durable = std::make_unique<DurableStore>(*repo.durable->file());
  }
  std::vector<std::pair<NodeId, std::string>> boot;
  for (const auto& [id, n] : nodes_) boot.emplace_back(id, n.name);
  for (const auto& [id, name] : boot) join(id, name);
  return stabilize();
}

Node& Simulation::node(const NodeId& id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(ErrorCode::kNotFound, "unknown node " + id.hex());
  return it->second;
}

const Node& Simulation::node(const NodeId& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(ErrorCode::kNotFound, "unknown node " + id.hex());
  return it->second;
}

NodeId Simulation::id_of(std::string_view name) const {
  for (const auto& [id, n] : nodes_)
    if (n.name == name) return id;
  throw Error(ErrorCode::kNotFound, "unknown node " + std::string(name));
}

std::string Simulation::name_of(const NodeId& id) const {
  auto it = nodes_.find(id);
  return it == nodes_.end() ? id.short_hex() : it->second.name;
}

std::vector<NodeId> Simulation::all_nodes() const {
  std::vector<NodeId> out;
  for (const auto& [id, n] : nodes_) out.push_back(id);
  return out;
}

NodeId Simulation::first_live() const {
  const Node* best = nullptr;
  for (const auto& [id, n] : nodes_)
    if (n.live && (!best || n.name < best->name)) best = &n;
  if (!best) throw Error(ErrorCode::kEmptyRing, "no live nodes");
  return best->id;
}

Node& Simulation::deliver(const NodeId& id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end() || !it->second.live)
    throw Error(ErrorCode::kDeliveryFailure, "node unreachable: " + name_of(id));
  return it->second;
}

ExternalRepository& Simulation::repository(std::string_view name) {
  auto it = repositories_.find(name);
  if (it == repositories_.end()) throw Error(ErrorCode::kNotFound, "unknown repository " + std::string(name));
  return it->second;
}

std::vector<std::string> Simulation::repository_names() const {
  std::vector<std::string> out;
  for (const auto& [name, r] : repositories_) out.push_back(name);
  return out;
}

std::vector<NodeId> Simulation::replica_targets(const NodeId& home, std::size_t width) const {
  std::vector<NodeId> out{home};
  const std::size_t cap = overlay_.successor_list_length() + 1;
  width = std::min(width, cap);
  if (width > 1)
    for (const auto& n : overlay_.live_successors(home, width - 1)) out.push_back(n);
  return out;
}

NodeId Simulation::home_of(const NodeId& from, const Key& k) { return overlay_.route(from, k, false).node; }

GenericStore& Simulation::peer(const NodeId& node, Aid aid) { return deliver(node).store(aid); }

std::vector<NodeId> Simulation::expected_holders(const Key& k, std::size_t width) const {
  width = std::min({width, overlay_.successor_list_length() + 1, overlay_.size()});
  if (width == 0) return {};
  const NodeId home = overlay_.responsible_node(k);
  std::vector<NodeId> out{home};
  for (const auto& n : overlay_.true_successors(home, width - 1)) out.push_back(n);
  return out;
}

std::map<Key, std::vector<NodeId>> Simulation::copies(Aid aid) const {
  std::map<Key, std::vector<NodeId>> out;
  for (const auto& [id, n] : nodes_) {
    if (!n.live) continue;
    for (const auto& r : n.durable[aid_index(aid)]->all())
      if (r.live()) out[r.key].push_back(id);
  }
  return out;
}

PlacementCheck Simulation::check_placement() const {
  PlacementCheck check;
  auto note = [&](std::string what) {
    ++check.violations;
    if (check.details.size() < 8) check.details.push_back(std::move(what));
  };
  for (Aid aid : kAllAids) {
    std::map<Key, std::vector<StoredRecord>> seen;
    std::map<Key, std::vector<NodeId>> holders;
    for (const auto& [id, n] : nodes_) {
      if (!n.live) continue;
      for (auto& r : n.durable[aid_index(aid)]->all()) {
        if (!r.live()) continue;
        holders[r.key].push_back(id);
        seen[r.key].push_back(std::move(r));
      }
    }
    for (const auto& [key, recs] : seen) {
      ++check.keys;
      std::size_t width = 0;
      for (const auto& r : recs) width = std::max<std::size_t>(width, r.width);
      if (width == 0) width = config_.replication;
      auto expected = expected_holders(key, width);
      auto have = holders[key];
      std::sort(expected.begin(), expected.end());
      std::sort(have.begin(), have.end());
      std::string label = std::string(aid_name(aid)) + " " + key.short_hex();
      if (have != expected) {
        note(label + ": " + std::to_string(have.size()) + " copies, expected " + std::to_string(expected.size()));
        continue;
      }
      for (const auto& r : recs) {
        if (r.kind != recs.front().kind || r.items != recs.front().items) {
          note(label + ": replicas disagree");
          break;
        }
      }
    }
  }
  return check;
}

}  // namespace pstore
