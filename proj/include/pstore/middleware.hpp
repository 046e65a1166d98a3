#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pstore/directories.hpp"
#include "pstore/object_model.hpp"
#include "pstore/policy.hpp"
#include "pstore/simulation.hpp"

namespace pstore {

enum class ResolutionKind { kLocal, kRemote, kReinstantiated };

std::string_view resolution_kind_name(ResolutionKind kind);

struct ResolvedTarget {
  ResolutionKind kind;
  ObjectLocation location;
};

// Location-independent reference. The cache is a hint: it is revalidated on
// every access. `root` is the named root the reference was reached from;
// re-instantiation under a root reads that root's committed snapshot.
struct AbstractRef {
  Guid guid;
  std::optional<Guid> root;
  std::optional<ResolvedTarget> cache;
  std::optional<ResolutionKind> last_kind;
};

using ObjectState = std::pair<Guid, ObjectNode>;

// The programmer-facing API as seen from one node.
class Middleware {
 public:
  Middleware(Simulation& sim, const PolicyRegistry& policies, NodeId self)
      : sim_(&sim), policies_(&policies), self_(self) {}

  const NodeId& node() const { return self_; }
  Simulation& sim() { return *sim_; }
  PersistenceInfrastructure infra() { return PersistenceInfrastructure(*sim_, self_); }

  // Objects hosted on this node's heap.
  std::uint64_t create(const std::string& class_id);
  ObjectNode& local(std::uint64_t local_id);
  /// Allocates the GUID on first use and advertises the instance and class.
  Guid guid_of(std::uint64_t local_id);
  void set_local(std::uint64_t local_id, std::string_view field, FieldValue value,
                 const std::optional<TxnId>& txn = {});

  void associate_name(const std::string& name, std::uint64_t local_id);
  AbstractRef get_object_by_name(const std::string& name);
  CommitResult commit(const std::string& name, const CommitOptions& options = {});
  CommitResult commit_root(const Guid& root, const CommitOptions& options = {});

  /// Extant instance (local first, then earliest registered), else
  /// re-instantiation on this node through the object's policy.
  ResolvedTarget resolve(const Guid& guid, const std::optional<Guid>& root = {});
  AbstractRef ref(const Guid& guid, std::optional<Guid> root = {}) { return AbstractRef{guid, root, {}, {}}; }
  /// Follows a REF field; the child keeps the parent's root context.
  AbstractRef child(AbstractRef& parent, std::string_view field);
  FieldValue read_field(AbstractRef& ref, std::string_view field);
  void write_field(AbstractRef& ref, std::string_view field, FieldValue value, const std::optional<TxnId>& txn = {});
  ObjectNode read_object(AbstractRef& ref);

  /// Closure of the named root as the application sees it.
  std::vector<ObjectState> read_closure(const std::string& name);
  /// Committed snapshot of the named root, decoded from stored states
  /// without instantiating anything. Empty if never committed.
  std::vector<ObjectState> read_committed_closure(const std::string& name);

  // Building blocks for policies.
  PolicyRecord policy_for(const Guid& guid);
  const PolicyBehavior& behavior(const PolicyRecord& record) const;
  Data reify_object(const ObjectNode& obj);
  Data default_reify(const ObjectNode& obj);
  ObjectNode default_instantiate(const Guid& guid, const std::optional<Guid>& root);
  CommitResult default_make_resilient(const Guid& root, const CommitOptions& options, const PolicyParams& params,
                                      const ClosureFilter& include = {});
  /// Live closure members of a root, resolved under the root's context.
  std::vector<ObjectNode*> collect_closure(const Guid& root, const ClosureFilter& include = {});
  /// Runs the commit steps: store then publishVersion for each write, then
  /// the manifest. Crash injection is counted in these steps.
  CommitResult publish_commit(const Guid& root, const std::vector<const ObjectNode*>& writes,
                              const CommitManifest& manifest, std::size_t width, const CommitOptions& options);
  Node& host_of(const ObjectLocation& location);

 private:
  ObjectNode* target_object(const ResolvedTarget& target);
  template <typename Fn>
  auto with_target(AbstractRef& ref, Fn&& fn);
  void record_write(const Guid& guid, const std::optional<Guid>& root, const std::optional<TxnId>& txn,
                    Node& host);

  Simulation* sim_;
  const PolicyRegistry* policies_;
  NodeId self_;
};

/// Applies a value to a field after checking the schema; throws kSchemaError.
void assign_field(ObjectNode& obj, const ClassDescriptor& cls, std::string_view field, FieldValue value);
const FieldValue& field_value(const ObjectNode& obj, const ClassDescriptor& cls, std::string_view field);

}  // namespace pstore
