#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "pstore/keyspace.hpp"

namespace pstore {

using NodeId = Key;

// Clockwise interval (lo, hi]; lo == hi means the whole ring.
struct KeyInterval {
  Key lo;
  Key hi;
  bool contains(const Key& k) const { return in_ring(k, lo, hi); }
  friend bool operator==(const KeyInterval&, const KeyInterval&) = default;
};

struct TopologyEvent {
  enum class Kind { kJoin, kFail };
  Kind kind;
  NodeId subject;
  // Responsibility of each recipient after the change.
  std::map<NodeId, KeyInterval> new_responsibility;
};

struct RoutingState {
  std::vector<NodeId> successors;  // nearest first, at most s entries
  std::optional<NodeId> predecessor;
  std::vector<NodeId> fingers;  // finger[i] = successor(id + 2^i), empty until fixed

  friend bool operator==(const RoutingState&, const RoutingState&) = default;
};

struct Route {
  NodeId node;
  std::size_t hops = 0;
};

// A service handle returned by dol: which node hosts the service for the key.
struct ServiceRef {
  NodeId node;
  Aid aid;
  std::size_t hops = 0;
};

struct HopStats {
  std::size_t lookups = 0;
  std::size_t total_hops = 0;
  std::size_t max_hops = 0;

  void record(std::size_t hops);
  double mean() const { return lookups ? static_cast<double>(total_hops) / static_cast<double>(lookups) : 0.0; }
};

// Simulated key-based routing overlay. Membership changes are committed
// immediately; routing state of the other nodes only catches up when
// stabilize() is driven to its fixpoint.
class Overlay {
 public:
  using Upcall = std::function<void(const NodeId& recipient, const TopologyEvent& event)>;

  explicit Overlay(std::size_t successor_list_length = 3);

  void set_upcall(Upcall upcall) { upcall_ = std::move(upcall); }

  /// Throws kDuplicate if the node is already live.
  void join(const NodeId& node);
  /// Throws kLastNode when node is the only live node, kNotFound if not live.
  void fail(const NodeId& node);

  bool is_live(const NodeId& node) const { return live_.contains(node); }
  const std::set<NodeId>& live_nodes() const { return live_; }
  std::size_t size() const { return live_.size(); }
  std::size_t successor_list_length() const { return s_; }

  /// Successor rule over current membership: first live node clockwise from
  /// k. Throws kEmptyRing.
  NodeId responsible_node(const Key& k) const;
  KeyInterval responsibility(const NodeId& node) const;
  /// The next `count` live nodes clockwise after `node` (ground truth).
  std::vector<NodeId> true_successors(const NodeId& node, std::size_t count) const;
  std::vector<NodeId> true_predecessors(const NodeId& node, std::size_t count) const;

  /// Routes from `origin` using routing state only (fingers and successor
  /// lists), skipping nodes that fail to answer. The origin must be live.
  /// Only recorded lookups count towards hop_stats().
  Route route(const NodeId& origin, const Key& k, bool record = true);
  ServiceRef dol(const NodeId& origin, const Key& k, Aid aid);
  /// dol from the lowest live node.
  ServiceRef dol(const Key& k, Aid aid);

  /// Runs stabilize rounds until routing state stops changing; returns the
  /// number of rounds.
  std::size_t stabilize();
  /// True when every live node's routing state matches the membership.
  bool quiescent() const;

  const RoutingState& routing(const NodeId& node) const;
  /// First live successors from the node's own routing state, excluding
  /// itself, at most `count`.
  std::vector<NodeId> live_successors(const NodeId& node, std::size_t count) const;

  const HopStats& hop_stats() const { return stats_; }

 private:
  RoutingState expected_state(const NodeId& node) const;
  NodeId first_live_successor(const NodeId& node) const;
  NodeId closest_preceding(const NodeId& node, const Key& k) const;
  Route find_successor(const NodeId& origin, const Key& k) const;
  bool stabilize_successors_round();
  bool fix_fingers_round();
  void deliver(TopologyEvent::Kind kind, const NodeId& subject, const std::map<NodeId, KeyInterval>& before);

  std::size_t s_;
  std::set<NodeId> live_;
  std::map<NodeId, RoutingState> state_;
  Upcall upcall_;
  HopStats stats_;
};

}  // namespace pstore
