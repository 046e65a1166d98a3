#include <gtest/gtest.h>

#include "bank.hpp"
#include "pstore/error.hpp"

using namespace pstore;
using fixture::Bank;

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

std::size_t copies_of(const Simulation& sim, const Pid& pid) {
  auto all = sim.copies(Aid::kDataStore);
  auto it = all.find(pid.key);
  return it == all.end() ? 0 : it->second.size();
}

std::map<Key, std::vector<NodeId>> census(const Simulation& sim) {
  std::map<Key, std::vector<NodeId>> out;
  for (Aid a : kAllAids)
    for (auto& [k, v] : sim.copies(a)) out[digest(std::string(aid_name(a)) + k.hex())] = v;
  return out;
}

}  // namespace

TEST(PolicyRegistry, BuiltinsAndCustom) {
  auto reg = PolicyRegistry::with_builtins();
  EXPECT_EQ(reg.names(), (std::vector<std::string>{"default", "none", "optimistic", "volatile"}));
  EXPECT_THROW(reg.add(default_policy()), Error);
  EXPECT_THROW(reg.get("missing"), Error);
  EXPECT_EQ(replicas_param({{"replicas", "2"}}, 3), 2u);
  EXPECT_EQ(replicas_param({}, 3), 3u);
  EXPECT_THROW(replicas_param({{"replicas", "0"}}, 3), Error);
  EXPECT_THROW(replicas_param({{"replicas", "2x"}}, 3), Error);
}

TEST(Policy, ReplicaCountFollowsParameter) {
  for (std::size_t r : {1u, 2u, 3u}) {
    auto sim = fixture::ring(6, 3);
    auto policies = PolicyRegistry::with_builtins();
    Middleware mw(*sim, policies, sim->id_of("n0"));
    fixture::set_policy(*sim, PolicyScope::for_class("Account"), PolicyRecord{"default", {{"replicas", std::to_string(r)}}});
    fixture::set_policy(*sim, PolicyScope::for_class("Bank"), PolicyRecord{"default", {{"replicas", std::to_string(r)}}});
    fixture::make_bank(mw);
    auto result = mw.commit("bank root");
    for (const auto& [g, pid] : result.manifest.snapshot) EXPECT_EQ(copies_of(*sim, pid), r) << "r=" << r;
    if (r == 1) continue;
    sim->fail(sim->overlay().responsible_node(result.root_pid.key));
    quiesce(*sim);
    EXPECT_EQ(copies_of(*sim, result.root_pid), r);
    EXPECT_EQ(sim->check_placement().violations, 0u);
  }
}

TEST(Policy, NoneMakesNothingResilient) {
  auto sim = fixture::ring(4);
  auto policies = PolicyRegistry::with_builtins();
  Middleware mw(*sim, policies, sim->id_of("n0"));
  fixture::set_policy(*sim, PolicyScope::for_class("Bank"), PolicyRecord{"none", {}});
  fixture::make_bank(mw);
  auto result = mw.commit("bank root");
  EXPECT_EQ(result.steps, 0u);
  EXPECT_EQ(result.stored, 0u);
  EXPECT_TRUE(sim->copies(Aid::kDataStore).empty());
  EXPECT_TRUE(mw.read_committed_closure("bank root").empty());
}

TEST(Policy, VolatilePartIsLeftOut) {
  auto sim = fixture::ring(5);
  auto policies = PolicyRegistry::with_builtins();
  Middleware mw(*sim, policies, sim->id_of("n0"));
  fixture::set_policy(*sim, PolicyScope::for_class("Bank"), PolicyRecord{"volatile", {{"exclude", "Account"}}});
  Bank bank = fixture::make_bank(mw);
  auto result = mw.commit("bank root");
  EXPECT_EQ(result.stored, 1u);
  EXPECT_EQ(result.steps, 3u);
  ASSERT_EQ(result.manifest.snapshot.size(), 1u);
  EXPECT_TRUE(result.manifest.snapshot.contains(bank.root_guid));

  sim->fail(sim->id_of("n0"));
  quiesce(*sim);
  Middleware other(*sim, policies, sim->id_of("n2"));
  AbstractRef root = other.get_object_by_name("bank root");
  AbstractRef a = other.child(root, "a");
  EXPECT_EQ(a.guid, bank.account_guids[0]);
  EXPECT_THROW(other.read_field(a, "balance"), Error);
}

TEST(Policy, VolatileExcludesSeveralClasses) {
  auto sim = fixture::ring(3);
  sim->classes().add(ClassDescriptor{"Holder", {{"bank", FieldKind::kRef}, {"n", FieldKind::kInt}}});
  auto policies = PolicyRegistry::with_builtins();
  Middleware mw(*sim, policies, sim->id_of("n0"));
  Bank bank = fixture::make_bank(mw);
  const std::uint64_t h = mw.create("Holder");
  mw.set_local(h, "bank", Ref{bank.root_guid});
  mw.associate_name("holder", h);
  fixture::set_policy(*sim, PolicyScope::for_class("Holder"), PolicyRecord{"volatile", {{"exclude", "Bank|Account"}}});
  EXPECT_EQ(mw.commit("holder").manifest.snapshot.size(), 1u);
}

TEST(Policy, OptimisticConflictAbortsWithoutTrace) {
  auto sim = fixture::ring(5);
  auto policies = PolicyRegistry::with_builtins();
  Middleware mw(*sim, policies, sim->id_of("n0"));
  fixture::set_policy(*sim, PolicyScope::for_class("Bank"), PolicyRecord{"optimistic", {}});
  Bank bank = fixture::make_bank(mw);
  mw.commit("bank root");
  const auto before = census(*sim);
  const auto history = mw.infra().versions().version_iterator(bank.account_guids[0]);

  Middleware t1(*sim, policies, sim->id_of("n2"));
  Middleware t2(*sim, policies, sim->id_of("n3"));
  AbstractRef r1 = t1.get_object_by_name("bank root");
  AbstractRef r2 = t2.get_object_by_name("bank root");
  AbstractRef a1 = t1.child(r1, "a");
  AbstractRef a2 = t2.child(r2, "a");
  t1.write_field(a1, "balance", std::int64_t{90}, TxnId("t1"));
  t2.write_field(a2, "balance", std::int64_t{80}, TxnId("t2"));

  CommitOptions opt;
  opt.txn = "t1";
  EXPECT_EQ(code_of([&] { t1.commit("bank root", opt); }), ErrorCode::kCommitAborted);
  EXPECT_EQ(census(*sim), before);
  EXPECT_EQ(mw.infra().versions().version_iterator(bank.account_guids[0]), history);
  EXPECT_EQ(fixture::committed_sum(mw), 400);
}

TEST(Policy, OptimisticKeepsOtherTransactionsOut) {
  auto sim = fixture::ring(5);
  auto policies = PolicyRegistry::with_builtins();
  Middleware mw(*sim, policies, sim->id_of("n0"));
  fixture::set_policy(*sim, PolicyScope::for_class("Bank"), PolicyRecord{"optimistic", {}});
  Bank bank = fixture::make_bank(mw);
  auto first = mw.commit("bank root");

  AbstractRef r = mw.get_object_by_name("bank root");
  AbstractRef a = mw.child(r, "a"), b = mw.child(r, "b"), c = mw.child(r, "c");
  mw.write_field(a, "balance", std::int64_t{90}, TxnId("t1"));
  mw.write_field(c, "balance", std::int64_t{90}, TxnId("t2"));
  mw.write_field(b, "balance", std::int64_t{110}, TxnId("t1"));
  CommitOptions opt;
  opt.txn = "t1";
  auto second = mw.commit("bank root", opt);

  EXPECT_EQ(second.stored, 3u);  // root, A, B
  EXPECT_EQ(second.manifest.snapshot.at(bank.account_guids[2]), first.manifest.snapshot.at(bank.account_guids[2]));
  EXPECT_EQ(second.manifest.snapshot.at(bank.account_guids[3]), first.manifest.snapshot.at(bank.account_guids[3]));
  EXPECT_NE(second.manifest.snapshot.at(bank.account_guids[0]), first.manifest.snapshot.at(bank.account_guids[0]));
  EXPECT_EQ(fixture::committed_sum(mw), 400);
  EXPECT_EQ(fixture::live_sum(mw), 390);
}

TEST(Policy, CustomHooksAreUsed) {
  auto sim = fixture::ring(3);
  auto policies = PolicyRegistry::with_builtins();
  int reified = 0;
  PolicyBehavior counting{"counting", {}, {}, {}};
  counting.reify = [&](Middleware& mw, const ObjectNode& o, const PolicyParams&) {
    ++reified;
    return mw.default_reify(o);
  };
  policies.add(counting);
  Middleware mw(*sim, policies, sim->id_of("n0"));
  fixture::set_policy(*sim, PolicyScope::for_class("Account"), PolicyRecord{"counting", {}});
  fixture::make_bank(mw);
  mw.commit("bank root");
  EXPECT_GE(reified, 4);
}

TEST(Policy, ObjectPolicyOverridesClassPolicy) {
  auto sim = fixture::ring(4);
  auto policies = PolicyRegistry::with_builtins();
  Middleware mw(*sim, policies, sim->id_of("n0"));
  fixture::set_policy(*sim, PolicyScope::for_class("Bank"), PolicyRecord{"none", {}});
  Bank bank = fixture::make_bank(mw);
  fixture::set_policy(*sim, PolicyScope::for_object(bank.root_guid), PolicyRecord{"default", {}});
  EXPECT_EQ(mw.commit("bank root").stored, 5u);
}
