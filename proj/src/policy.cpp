#include "pstore/policy.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "pstore/error.hpp"
#include "pstore/middleware.hpp"

namespace pstore {

std::size_t replicas_param(const PolicyParams& params, std::size_t fallback) {
  auto it = params.find("replicas");
  if (it == params.end()) return fallback;
  std::size_t n = 0;
  auto [ptr, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), n);
  if (ec != std::errc() || ptr != it->second.data() + it->second.size() || n == 0)
    throw Error(ErrorCode::kInvalidArgument, "bad replicas parameter: " + it->second);
  return n;
}

PolicyRegistry PolicyRegistry::with_builtins() {
  PolicyRegistry r;
  r.add(default_policy());
  r.add(none_policy());
  r.add(volatile_part_policy());
  r.add(optimistic_txn_policy());
  return r;
}

void PolicyRegistry::add(PolicyBehavior behavior) {
  if (behavior.name.empty()) throw Error(ErrorCode::kInvalidArgument, "policy needs a name");
  if (behaviors_.contains(behavior.name))
    throw Error(ErrorCode::kDuplicate, "policy already registered: " + behavior.name);
  std::string name = behavior.name;
  behaviors_.emplace(std::move(name), std::move(behavior));
}

const PolicyBehavior& PolicyRegistry::get(std::string_view name) const {
  auto it = behaviors_.find(name);
  if (it == behaviors_.end()) throw Error(ErrorCode::kNotFound, "unknown policy " + std::string(name));
  return it->second;
}

std::vector<std::string> PolicyRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [n, b] : behaviors_) out.push_back(n);
  return out;
}

PolicyBehavior default_policy() { return PolicyBehavior{"default", {}, {}, {}}; }

PolicyBehavior none_policy() {
  PolicyBehavior b{"none", {}, {}, {}};
  b.make_resilient = [](Middleware& mw, const Guid& root, const CommitOptions&, const PolicyParams&) {
    CommitResult result;
    auto members = mw.collect_closure(root);
    result.root_pid = generate_pid(mw.reify_object(*members.front()));
    return result;
  };
  return b;
}

PolicyBehavior volatile_part_policy() {
  PolicyBehavior b{"volatile", {}, {}, {}};
  b.make_resilient = [](Middleware& mw, const Guid& root, const CommitOptions& options, const PolicyParams& params) {
    std::set<std::string, std::less<>> excluded;
    if (auto it = params.find("exclude"); it != params.end()) {
      std::string_view rest = it->second;
      while (!rest.empty()) {
        auto bar = rest.find('|');
        auto part = rest.substr(0, bar);
        if (!part.empty()) excluded.emplace(part);
        rest = bar == std::string_view::npos ? std::string_view{} : rest.substr(bar + 1);
      }
    }
    ClosureFilter include = [excluded](const ObjectNode& o) { return !excluded.contains(o.class_id); };
    return mw.default_make_resilient(root, options, params, include);
  };
  return b;
}

PolicyBehavior optimistic_txn_policy() {
  PolicyBehavior b{"optimistic", {}, {}, {}};
  b.make_resilient = [](Middleware& mw, const Guid& root, const CommitOptions& options, const PolicyParams& params) {
    auto members = mw.collect_closure(root);
    auto versions = mw.infra().versions();
    const auto previous = versions.committed_snapshot(root);
    auto& ledger = mw.sim().deliver(mw.node()).txn_ledger;

    std::set<Guid> mine;
    if (options.txn) {
      for (const auto* m : members) {
        auto it = ledger.find(*m->guid);
        if (it == ledger.end() || !it->second.contains(*options.txn)) continue;
        if (it->second.size() > 1)
          throw Error(ErrorCode::kCommitAborted, m->guid->hex() + " was also updated by another transaction");
        mine.insert(*m->guid);
      }
    }

    CommitManifest manifest{root, {}};
    std::vector<const ObjectNode*> writes;
    for (const auto* m : members) {
      const Guid& g = *m->guid;
      const bool fresh = !previous || !previous->snapshot.contains(g);
      if (g == root || fresh || mine.contains(g)) {
        writes.push_back(m);
        manifest.snapshot[g] = generate_pid(mw.reify_object(*m));
      } else {
        manifest.snapshot[g] = previous->snapshot.at(g);
      }
    }
    const std::size_t width = replicas_param(params, mw.sim().config().replication);
    CommitResult result = mw.publish_commit(root, writes, manifest, width, options);
    for (const auto& g : mine) {
      auto it = ledger.find(g);
      it->second.erase(*options.txn);
      if (it->second.empty()) ledger.erase(it);
    }
    return result;
  };
  return b;
}

}  // namespace pstore
