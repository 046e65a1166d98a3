#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pstore/directories.hpp"
#include "pstore/object_model.hpp"
#include "pstore/simulation.hpp"

namespace pstore {

class Middleware;

struct CommitOptions {
  std::optional<TxnId> txn;
  // Crash the committing node once this many commit steps have completed.
  std::optional<std::size_t> crash_after_step;
};

struct CommitResult {
  Pid root_pid;
  std::size_t steps = 0;   // store and publish steps executed, manifest included
  std::size_t stored = 0;  // objects whose state was written
  CommitManifest manifest;
};

// A named resilience behaviour. Empty hooks fall back to the built-in
// default for that hook.
struct PolicyBehavior {
  using ReifyHook = std::function<Data(Middleware&, const ObjectNode&, const PolicyParams&)>;
  using InstantiateHook =
      std::function<ObjectNode(Middleware&, const Guid&, const std::optional<Guid>& root, const PolicyParams&)>;
  using MakeResilientHook =
      std::function<CommitResult(Middleware&, const Guid&, const CommitOptions&, const PolicyParams&)>;

  std::string name;
  ReifyHook reify;
  InstantiateHook instantiate;
  MakeResilientHook make_resilient;
};

// Every node sees the same name-to-behaviour bindings; the policy store only
// persists the name and parameters.
class PolicyRegistry {
 public:
  /// Registry holding default, none, volatile and optimistic.
  static PolicyRegistry with_builtins();

  void add(PolicyBehavior behavior);  // throws kDuplicate
  const PolicyBehavior& get(std::string_view name) const;  // throws kNotFound
  bool contains(std::string_view name) const { return behaviors_.contains(name); }
  std::vector<std::string> names() const;

 private:
  std::map<std::string, PolicyBehavior, std::less<>> behaviors_;
};

/// Replicates the whole closure (every hook default).
PolicyBehavior default_policy();
/// Makes nothing resilient.
PolicyBehavior none_policy();
/// Leaves objects of the classes in param `exclude` (separated by '|') out of
/// the committed closure, along with anything reachable only through them.
PolicyBehavior volatile_part_policy();
/// Commits only the root, new members and objects updated by the
/// committing transaction; aborts if any of those was also updated by another
/// uncommitted transaction.
PolicyBehavior optimistic_txn_policy();

/// Parses the `replicas` parameter, falling back to the replication factor.
std::size_t replicas_param(const PolicyParams& params, std::size_t fallback);

}  // namespace pstore
