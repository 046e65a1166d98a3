#include "pstore/overlay.hpp"

#include <algorithm>
#include <stdexcept>

#include "pstore/error.hpp"

namespace pstore {

void HopStats::record(std::size_t hops) {
  ++lookups;
  total_hops += hops;
  max_hops = std::max(max_hops, hops);
}

Overlay::Overlay(std::size_t successor_list_length) : s_(std::max<std::size_t>(1, successor_list_length)) {}

NodeId Overlay::responsible_node(const Key& k) const {
  if (live_.empty()) throw Error(ErrorCode::kEmptyRing, "no live nodes");
  auto it = live_.lower_bound(k);
  return it == live_.end() ? *live_.begin() : *it;
}

std::vector<NodeId> Overlay::true_successors(const NodeId& node, std::size_t count) const {
  std::vector<NodeId> out;
  if (live_.empty()) return out;
  auto it = live_.upper_bound(node);
  for (std::size_t seen = 0; seen < live_.size() && out.size() < count; ++seen) {
    if (it == live_.end()) it = live_.begin();
    if (*it == node) break;
    out.push_back(*it++);
  }
  return out;
}

std::vector<NodeId> Overlay::true_predecessors(const NodeId& node, std::size_t count) const {
  std::vector<NodeId> out;
  if (live_.empty()) return out;
  auto it = live_.lower_bound(node);
  for (std::size_t seen = 0; seen < live_.size() && out.size() < count; ++seen) {
    if (it == live_.begin()) it = live_.end();
    --it;
    if (*it == node) break;
    out.push_back(*it);
  }
  return out;
}

KeyInterval Overlay::responsibility(const NodeId& node) const {
  auto preds = true_predecessors(node, 1);
  return KeyInterval{preds.empty() ? node : preds.front(), node};
}

void Overlay::join(const NodeId& node) {
  if (live_.contains(node)) throw Error(ErrorCode::kDuplicate, "node already live: " + node.hex());
  std::map<NodeId, KeyInterval> before;
  for (const auto& n : live_) before.emplace(n, responsibility(n));

  RoutingState st;
  if (!live_.empty()) {
    Route r = find_successor(*live_.begin(), node);
    if (r.node != node) {
      st.successors.push_back(r.node);
      for (const auto& n : state_.at(r.node).successors) {
        if (st.successors.size() >= s_) break;
        if (n != node && live_.contains(n) &&
            std::find(st.successors.begin(), st.successors.end(), n) == st.successors.end())
          st.successors.push_back(n);
      }
    }
  }
  state_[node] = std::move(st);
  live_.insert(node);
  deliver(TopologyEvent::Kind::kJoin, node, before);
}

void Overlay::fail(const NodeId& node) {
  if (!live_.contains(node)) throw Error(ErrorCode::kNotFound, "node not live: " + node.hex());
  if (live_.size() == 1) throw Error(ErrorCode::kLastNode, "cannot fail the last live node");
  std::map<NodeId, KeyInterval> before;
  for (const auto& n : live_) before.emplace(n, responsibility(n));
  live_.erase(node);
  state_.erase(node);
  deliver(TopologyEvent::Kind::kFail, node, before);
}

void Overlay::deliver(TopologyEvent::Kind kind, const NodeId& subject,
                      const std::map<NodeId, KeyInterval>& before) {
  // Recipients: nodes whose own range moved, plus the s-neighbourhood on both
  // sides of the subject, which covers every node whose replica set changed.
  std::set<NodeId> recipients;
  for (const auto& n : live_) {
    auto it = before.find(n);
    if (it == before.end() || !(it->second == responsibility(n))) recipients.insert(n);
  }
  for (const auto& n : true_predecessors(subject, s_)) recipients.insert(n);
  for (const auto& n : true_successors(subject, s_)) recipients.insert(n);
  if (live_.contains(subject)) recipients.insert(subject);

  TopologyEvent ev{kind, subject, {}};
  for (const auto& n : recipients) ev.new_responsibility.emplace(n, responsibility(n));
  if (!upcall_) return;
  for (const auto& n : recipients) upcall_(n, ev);
}

NodeId Overlay::first_live_successor(const NodeId& node) const {
  const RoutingState& st = state_.at(node);
  for (const auto& n : st.successors)
    if (n != node && live_.contains(n)) return n;
  for (const auto& n : st.fingers)
    if (n != node && live_.contains(n)) return n;
  return node;
}

NodeId Overlay::closest_preceding(const NodeId& node, const Key& k) const {
  const RoutingState& st = state_.at(node);
  NodeId best = node;
  auto consider = [&](const NodeId& c) {
    if (c == node || !live_.contains(c) || !in_ring_open(c, node, k)) return;
    if (best == node || in_ring_open(c, best, k)) best = c;
  };
  for (const auto& c : st.fingers) consider(c);
  for (const auto& c : st.successors) consider(c);
  return best;
}

Route Overlay::find_successor(const NodeId& origin, const Key& k) const {
  NodeId n = origin;
  std::size_t hops = 0;
  const std::size_t guard = 4 * live_.size() + 200;
  for (std::size_t step = 0; step < guard; ++step) {
    const RoutingState& st = state_.at(n);
    if (st.predecessor && live_.contains(*st.predecessor) && in_ring(k, *st.predecessor, n)) return {n, hops};
    NodeId succ = first_live_successor(n);
    if (succ == n) return {n, hops};
    if (in_ring(k, n, succ)) return {succ, hops + 1};
    NodeId next = closest_preceding(n, k);
    if (next == n) next = succ;
    n = next;
    ++hops;
  }
  throw std::logic_error("routing did not terminate for key " + k.hex());
}

Route Overlay::route(const NodeId& origin, const Key& k, bool record) {
  if (live_.empty()) throw Error(ErrorCode::kEmptyRing, "no live nodes");
  if (!live_.contains(origin)) throw Error(ErrorCode::kDeliveryFailure, "origin not live: " + origin.hex());
  Route r = find_successor(origin, k);
  if (record) stats_.record(r.hops);
  return r;
}

ServiceRef Overlay::dol(const NodeId& origin, const Key& k, Aid aid) {
  Route r = route(origin, k);
  return ServiceRef{r.node, aid, r.hops};
}

ServiceRef Overlay::dol(const Key& k, Aid aid) {
  if (live_.empty()) throw Error(ErrorCode::kEmptyRing, "no live nodes");
  return dol(*live_.begin(), k, aid);
}

bool Overlay::stabilize_successors_round() {
  bool changed = false;
  for (const auto& n : live_) {
    RoutingState next = state_.at(n);
    if (next.predecessor && !live_.contains(*next.predecessor)) next.predecessor.reset();

    NodeId succ = first_live_successor(n);
    if (succ == n && live_.size() > 1) {
      // Lost every successor: re-enter through another live node.
      NodeId other = *live_.begin() == n ? *std::next(live_.begin()) : *live_.begin();
      Route r = find_successor(other, n.plus_one());
      succ = r.node != n ? r.node : other;
    }
    if (succ != n) {
      const auto& x = state_.at(succ).predecessor;
      if (x && *x != n && live_.contains(*x) && in_ring_open(*x, n, succ)) succ = *x;
    } else if (next.predecessor && *next.predecessor != n) {
      succ = *next.predecessor;
    }

    next.successors.clear();
    if (succ != n) {
      next.successors.push_back(succ);
      for (const auto& c : state_.at(succ).successors) {
        if (next.successors.size() >= s_) break;
        if (c != n && live_.contains(c) &&
            std::find(next.successors.begin(), next.successors.end(), c) == next.successors.end())
          next.successors.push_back(c);
      }
    }

    RoutingState& cur = state_.at(n);
    if (!(cur == next)) {
      cur = std::move(next);
      changed = true;
    }

    if (succ != n) {
      auto& sp = state_.at(succ).predecessor;
      if (!sp || !live_.contains(*sp) || *sp == succ || in_ring_open(n, *sp, succ)) {
        if (sp != n) {
          sp = n;
          changed = true;
        }
      }
    }
  }
  return changed;
}

bool Overlay::fix_fingers_round() {
  bool changed = false;
  for (const auto& n : live_) {
    std::vector<NodeId> fingers;
    fingers.reserve(Key::kBits);
    Key prev_target;
    for (std::size_t i = 0; i < Key::kBits; ++i) {
      Key target = n.plus_pow2(i);
      // successor(prev_target) also owns target when nothing lies between.
      if (i > 0 && fingers.back() != n && in_ring(target, prev_target, fingers.back())) {
        fingers.push_back(fingers.back());
      } else {
        fingers.push_back(find_successor(n, target).node);
      }
      prev_target = target;
    }
    RoutingState& cur = state_.at(n);
    if (cur.fingers != fingers) {
      cur.fingers = std::move(fingers);
      changed = true;
    }
  }
  return changed;
}

std::size_t Overlay::stabilize() {
  const std::size_t cap = 8 * live_.size() + 64;
  std::size_t rounds = 0;
  while (true) {
    bool changed = false;
    while (stabilize_successors_round()) {
      changed = true;
      if (++rounds > cap) throw std::logic_error("successor stabilization did not converge");
    }
    while (fix_fingers_round()) {
      changed = true;
      if (++rounds > cap) throw std::logic_error("finger repair did not converge");
    }
    ++rounds;
    if (!changed) break;
  }
  return rounds;
}

RoutingState Overlay::expected_state(const NodeId& node) const {
  RoutingState st;
  st.successors = true_successors(node, s_);
  if (live_.size() > 1) st.predecessor = true_predecessors(node, 1).front();
  st.fingers.reserve(Key::kBits);
  for (std::size_t i = 0; i < Key::kBits; ++i) st.fingers.push_back(responsible_node(node.plus_pow2(i)));
  return st;
}

bool Overlay::quiescent() const {
  return std::all_of(live_.begin(), live_.end(),
                     [&](const NodeId& n) { return state_.at(n) == expected_state(n); });
}

const RoutingState& Overlay::routing(const NodeId& node) const {
  auto it = state_.find(node);
  if (it == state_.end()) throw Error(ErrorCode::kNotFound, "no routing state for " + node.hex());
  return it->second;
}

std::vector<NodeId> Overlay::live_successors(const NodeId& node, std::size_t count) const {
  std::vector<NodeId> out;
  for (const auto& n : routing(node).successors) {
    if (out.size() >= count) break;
    if (n != node && live_.contains(n)) out.push_back(n);
  }
  return out;
}

}  // namespace pstore
