#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pstore/keyspace.hpp"
#include "pstore/object_model.hpp"
#include "pstore/simulation.hpp"

namespace pstore {

struct VersionEntry {
  Pid pid;
  std::uint64_t time = 0;
  friend bool operator==(const VersionEntry&, const VersionEntry&) = default;
};

// The committed closure of a named root: every member GUID and the PID of its
// committed state. Published last, in one write, so readers see all or none.
struct CommitManifest {
  Guid root;
  std::map<Guid, Pid> snapshot;

  Data encode() const;
  static CommitManifest decode(std::span<const std::uint8_t> data);
  friend bool operator==(const CommitManifest&, const CommitManifest&) = default;
};

struct InstanceLocation {
  ObjectLocation location;
  std::uint64_t registered_at = 0;
  friend bool operator==(const InstanceLocation&, const InstanceLocation&) = default;
};

struct InstanceRecord {
  std::uint64_t creation_time = 0;
  std::vector<InstanceLocation> locations;

  Data encode() const;
  static InstanceRecord decode(std::span<const std::uint8_t> data);
};

struct PolicyScope {
  enum class Kind { kClass, kObject };
  Kind kind = Kind::kClass;
  std::string class_id;
  Guid guid;

  static PolicyScope for_class(std::string id) { return {Kind::kClass, std::move(id), {}}; }
  static PolicyScope for_object(const Guid& g) { return {Kind::kObject, {}, g}; }
  Key key() const;
  std::string text() const;
};

using PolicyParams = std::map<std::string, std::string>;

struct PolicyRecord {
  std::string name;
  PolicyParams params;

  Data encode() const;
  static PolicyRecord decode(std::span<const std::uint8_t> data);
  friend bool operator==(const PolicyRecord&, const PolicyRecord&) = default;
};

// Base for the six facades: every call is located with dol from the caller.
class DirectoryService {
 public:
  DirectoryService(Simulation& sim, NodeId caller, Aid aid) : sim_(&sim), caller_(caller), aid_(aid) {}

 protected:
  GenericStore& at(const Key& k) { return sim_->service(sim_->dol(caller_, k, aid_)); }

  Simulation* sim_;
  NodeId caller_;
  Aid aid_;
};

class NameDirectory : public DirectoryService {
 public:
  NameDirectory(Simulation& sim, NodeId caller) : DirectoryService(sim, caller, Aid::kNameDir) {}
  static Key key_for(std::string_view name) { return digest(name); }

  Guid get_guid_by_name(const std::string& name);
  void associate_name(const std::string& name, const Guid& guid);
};

class VersionDirectory : public DirectoryService {
 public:
  VersionDirectory(Simulation& sim, NodeId caller) : DirectoryService(sim, caller, Aid::kVersionDir) {}
  static Key snapshot_key(const Guid& root) { return digest("snapshot:" + root.hex()); }

  void publish_version(const Guid& guid, const Pid& pid);
  Pid get_latest_version(const Guid& guid);
  std::vector<VersionEntry> version_iterator(const Guid& guid);

  std::optional<CommitManifest> committed_snapshot(const Guid& root);
  void publish_snapshot(const CommitManifest& manifest);
};

class ObjectDirectory : public DirectoryService {
 public:
  ObjectDirectory(Simulation& sim, NodeId caller) : DirectoryService(sim, caller, Aid::kObjectDir) {}

  /// Registered instances that are still reachable, earliest registration
  /// first, ties broken by node id.
  std::vector<InstanceLocation> get_objects(const Guid& guid);
  void publish_instance(const Guid& guid, const ObjectLocation& location);
  /// The object's GUID, allocated on first use.
  Guid get_guid(ObjectNode& obj);
  std::uint64_t get_creation_time(const Guid& guid);
  std::optional<InstanceRecord> record(const Guid& guid);

  /// True if the location still names a live heap object.
  static bool reachable(const Simulation& sim, const ObjectLocation& loc);
};

class DataStore : public DirectoryService {
 public:
  DataStore(Simulation& sim, NodeId caller) : DirectoryService(sim, caller, Aid::kDataStore) {}

  static Pid generate_pid(const Data& data) { return pstore::generate_pid(data); }
  /// width 0 means the replication factor.
  void store(const Pid& pid, const Data& data, std::size_t width = 0);
  Data get_object_data(const Pid& pid);
  std::uint64_t get_creation_time(const Pid& pid);

  // Location-recording strategy only.
  std::vector<std::string> get_store(const Pid& pid);
  void record_data_locations(const Pid& pid, const std::vector<std::string>& repositories);

 private:
  void require_strategy(DataStrategy s, const char* op) const;
  std::vector<std::string> choose_repositories(const Pid& pid) const;
};

class CodeStore : public DirectoryService {
 public:
  CodeStore(Simulation& sim, NodeId caller) : DirectoryService(sim, caller, Aid::kCodeStore) {}

  void register_class(const Guid& guid, const std::string& class_id);
  const ClassDescriptor& get_class(const Guid& guid);
  std::string get_class_id(const Guid& guid);
};

class PolicyStore : public DirectoryService {
 public:
  PolicyStore(Simulation& sim, NodeId caller) : DirectoryService(sim, caller, Aid::kPolicyStore) {}

  void set_resilience_policy(const PolicyScope& scope, const PolicyRecord& policy);
  /// Object scope, then class scope, then the system default.
  PolicyRecord lookup_policy(const Guid& guid, const std::optional<std::string>& class_id);
  PolicyRecord default_policy() const;
};

// The six stores as seen from one node.
class PersistenceInfrastructure {
 public:
  PersistenceInfrastructure(Simulation& sim, NodeId caller)
      : names_(sim, caller), versions_(sim, caller), objects_(sim, caller), data_(sim, caller), code_(sim, caller),
        policies_(sim, caller) {}

  NameDirectory& names() { return names_; }
  VersionDirectory& versions() { return versions_; }
  ObjectDirectory& objects() { return objects_; }
  DataStore& data() { return data_; }
  CodeStore& code() { return code_; }
  PolicyStore& policies() { return policies_; }

 private:
  NameDirectory names_;
  VersionDirectory versions_;
  ObjectDirectory objects_;
  DataStore data_;
  CodeStore code_;
  PolicyStore policies_;
};

/// Drops object-directory locations that no longer name a live instance.
/// Each live node cleans only the records it is home for.
std::size_t purge_stale_instances(Simulation& sim);

/// Overlay and replica repair to quiescence, then stale-instance purge.
StabilizeResult quiesce(Simulation& sim);

}  // namespace pstore
