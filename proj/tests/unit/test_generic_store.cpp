#include <gtest/gtest.h>

#include <algorithm>

#include "oracles.hpp"
#include "pstore/error.hpp"
#include "pstore/simulation.hpp"

using namespace pstore;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

struct Ring {
  Simulation sim;
  explicit Ring(std::size_t n, std::size_t r = 3, std::uint64_t seed = 1)
      : sim(SimulationConfig{seed, r, {}, DataStrategy::kCoLocated, 0}) {
    for (std::size_t i = 0; i < n; ++i) {
      sim.join("n" + std::to_string(i));
      sim.stabilize();
    }
  }
  GenericStore& home(const Key& k, Aid aid = Aid::kNameDir) { return sim.service(sim.dol(sim.first_live(), k, aid)); }
  std::vector<Key> live() const {
    return {sim.overlay().live_nodes().begin(), sim.overlay().live_nodes().end()};
  }
  std::vector<Key> holders(const Key& k, Aid aid = Aid::kNameDir) const {
    auto all = sim.copies(aid);
    auto it = all.find(k);
    if (it == all.end()) return {};
    auto v = it->second;
    std::sort(v.begin(), v.end());
    return v;
  }
  std::vector<Key> expected(const Key& k, std::size_t width) const {
    auto v = oracle::holders(live(), k, width);
    std::sort(v.begin(), v.end());
    return v;
  }
};

}  // namespace

TEST(GenericStore, PutGetUpdateRemove) {
  Ring ring(5);
  const Key k = digest("key");
  ring.home(k).put(k, to_data("v1"));
  EXPECT_EQ(ring.home(k).get(k), to_data("v1"));
  EXPECT_EQ(ring.home(k).update(k, to_data("v2")), to_data("v1"));
  EXPECT_EQ(ring.home(k).get(k), to_data("v2"));
  EXPECT_EQ(ring.home(k).remove(k), to_data("v2"));
  EXPECT_EQ(code_of([&] { ring.home(k).get(k); }), ErrorCode::kNotFound);
  EXPECT_EQ(code_of([&] { ring.home(k).update(k, to_data("x")); }), ErrorCode::kNotFound);
  EXPECT_EQ(code_of([&] { ring.home(k).remove(k); }), ErrorCode::kNotFound);
}

TEST(GenericStore, AppendLogKeepsOrder) {
  Ring ring(4);
  const Key k = digest("log");
  for (int i = 0; i < 5; ++i) ring.home(k).append(k, to_data(std::to_string(i)));
  auto log = ring.home(k).read_log(k);
  ASSERT_EQ(log.size(), 5u);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(log[i], to_data(std::to_string(i)));
  EXPECT_EQ(ring.home(k).remove(k), to_data("4"));
}

TEST(GenericStore, KindsDoNotMix) {
  Ring ring(3);
  const Key v = digest("value"), l = digest("log");
  ring.home(v).put(v, to_data("x"));
  ring.home(l).append(l, to_data("y"));
  EXPECT_EQ(code_of([&] { ring.home(v).append(v, to_data("z")); }), ErrorCode::kWrongKind);
  EXPECT_EQ(code_of([&] { ring.home(v).read_log(v); }), ErrorCode::kWrongKind);
  EXPECT_EQ(code_of([&] { ring.home(l).put(l, to_data("z")); }), ErrorCode::kWrongKind);
  EXPECT_EQ(code_of([&] { ring.home(l).get(l); }), ErrorCode::kWrongKind);
  EXPECT_EQ(code_of([&] { ring.home(l).update(l, to_data("z")); }), ErrorCode::kWrongKind);
}

TEST(GenericStore, WritesReachReplicaSet) {
  Ring ring(8);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const Key k = oracle::random_key(rng);
    ring.home(k).put(k, to_data("v"));
    EXPECT_EQ(ring.holders(k), ring.expected(k, 3));
  }
}

TEST(GenericStore, GetAllListsLiveEntries) {
  Ring ring(1);
  GenericStore& s = ring.home(digest("a"));
  s.put(digest("a"), to_data("1"));
  s.append(digest("b"), to_data("2"));
  s.put(digest("c"), to_data("3"));
  s.remove(digest("c"));
  auto all = s.get_all();
  ASSERT_EQ(all.size(), 2u);
}

TEST(GenericStore, TombstoneBlocksResurrection) {
  Ring ring(6);
  const Key k = digest("doomed");
  ring.home(k).put(k, to_data("alive"));
  const auto before = ring.holders(k);
  ring.home(k).remove(k);

  // A stale replica that missed the removal must not bring the value back.
  const NodeId home = ring.sim.overlay().responsible_node(k);
  const NodeId stale = before.front() == home ? before.back() : before.front();
  StoredRecord old{k, EntryKind::kValue, {to_data("alive")}, 1, 0};
  ring.sim.node(stale).store(Aid::kNameDir).accept(old);

  ring.sim.fail(home);
  ring.sim.stabilize();
  EXPECT_EQ(code_of([&] { ring.home(k).get(k); }), ErrorCode::kNotFound);
  ring.sim.join(ring.sim.name_of(home));
  ring.sim.stabilize();
  EXPECT_EQ(code_of([&] { ring.home(k).get(k); }), ErrorCode::kNotFound);
}

TEST(GenericStore, ReplicaAfterHomeFailureServesLatest) {
  Ring ring(6);
  const Key k = digest("k");
  ring.home(k).put(k, to_data("v1"));
  ring.home(k).update(k, to_data("v2"));
  ring.sim.fail(ring.sim.overlay().responsible_node(k));
  // No stabilize: the new home answers from what it or its replicas hold.
  EXPECT_EQ(ring.home(k).get(k), to_data("v2"));
}

TEST(GenericStore, RepairRestoresPlacementAfterChurn) {
  Ring ring(8);
  std::mt19937_64 rng(12);
  std::vector<Key> keys;
  for (int i = 0; i < 100; ++i) {
    keys.push_back(oracle::random_key(rng));
    ring.home(keys.back()).put(keys.back(), to_data(std::to_string(i)));
  }
  auto live = ring.live();
  ring.sim.fail(live[1]);
  ring.sim.fail(live[5]);
  ring.sim.stabilize();
  for (const Key& k : keys) ASSERT_EQ(ring.holders(k), ring.expected(k, 3));
  ring.sim.join("fresh-a");
  ring.sim.join("fresh-b");
  ring.sim.stabilize();
  for (std::size_t i = 0; i < keys.size(); ++i) {
    ASSERT_EQ(ring.holders(keys[i]), ring.expected(keys[i], 3));
    ASSERT_EQ(ring.home(keys[i]).get(keys[i]), to_data(std::to_string(i)));
  }
  EXPECT_EQ(ring.sim.check_placement().violations, 0u);
}

TEST(GenericStore, WiderWriteKeepsItsWidth) {
  Ring ring(8);
  const Key k = digest("wide");
  ring.home(k).put(k, to_data("v"), 4);
  EXPECT_EQ(ring.holders(k), ring.expected(k, 4));
  ring.sim.fail(ring.sim.overlay().responsible_node(k));
  ring.sim.stabilize();
  EXPECT_EQ(ring.holders(k), ring.expected(k, 4));
}

TEST(GenericStore, ReplicationOneKeepsSingleCopy) {
  Ring ring(5, 1);
  const Key k = digest("solo");
  ring.home(k).put(k, to_data("v"));
  EXPECT_EQ(ring.holders(k).size(), 1u);
}

TEST(GenericStore, UpcallsMarkRepairPending) {
  Ring ring(5);
  std::size_t before = 0;
  for (const Key& n : ring.live()) before += ring.sim.node(n).store(Aid::kDataStore).upcalls_received();
  ring.sim.join("newcomer");
  std::size_t after = 0, pending = 0;
  for (const Key& n : ring.live()) {
    after += ring.sim.node(n).store(Aid::kDataStore).upcalls_received();
    pending += ring.sim.node(n).store(Aid::kDataStore).repair_pending();
  }
  EXPECT_GT(after, before);
  EXPECT_GT(pending, 0u);
  ring.sim.stabilize();
  for (const Key& n : ring.live()) EXPECT_FALSE(ring.sim.node(n).store(Aid::kDataStore).repair_pending());
}
