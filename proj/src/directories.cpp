#include "pstore/directories.hpp"

#include <algorithm>

#include "pstore/codec.hpp"
#include "pstore/error.hpp"

namespace pstore {

namespace {

constexpr std::uint8_t kCoLocatedTag = 0;
constexpr std::uint8_t kLocationTag = 1;

bool is_not_found(const Error& e) { return e.code() == ErrorCode::kNotFound; }

}  // namespace

Data CommitManifest::encode() const {
  ByteWriter w;
  w.key(root.key).u32(static_cast<std::uint32_t>(snapshot.size()));
  for (const auto& [g, p] : snapshot) w.key(g.key).key(p.key);
  return w.take();
}

CommitManifest CommitManifest::decode(std::span<const std::uint8_t> data) {
  ByteReader r(data);
  CommitManifest m;
  m.root = Guid{r.key()};
  for (std::uint32_t n = r.u32(); n > 0; --n) {
    Guid g{r.key()};
    m.snapshot.emplace(g, Pid{r.key()});
  }
  r.expect_done();
  return m;
}

Data InstanceRecord::encode() const {
  ByteWriter w;
  w.u64(creation_time).u32(static_cast<std::uint32_t>(locations.size()));
  for (const auto& l : locations)
    w.key(l.location.node).u64(l.location.incarnation).u64(l.location.local_id).u64(l.registered_at);
  return w.take();
}

InstanceRecord InstanceRecord::decode(std::span<const std::uint8_t> data) {
  ByteReader r(data);
  InstanceRecord rec;
  rec.creation_time = r.u64();
  for (std::uint32_t n = r.u32(); n > 0; --n) {
    InstanceLocation l;
    l.location.node = r.key();
    l.location.incarnation = r.u64();
    l.location.local_id = r.u64();
    l.registered_at = r.u64();
    rec.locations.push_back(l);
  }
  r.expect_done();
  return rec;
}

Key PolicyScope::key() const { return digest(text()); }

std::string PolicyScope::text() const {
  return kind == Kind::kClass ? "class:" + class_id : "object:" + guid.hex();
}

Data PolicyRecord::encode() const {
  ByteWriter w;
  w.str(name).u32(static_cast<std::uint32_t>(params.size()));
  for (const auto& [k, v] : params) w.str(k).str(v);
  return w.take();
}

PolicyRecord PolicyRecord::decode(std::span<const std::uint8_t> data) {
  ByteReader r(data);
  PolicyRecord p;
  p.name = r.str();
  for (std::uint32_t n = r.u32(); n > 0; --n) {
    std::string k = r.str();
    p.params[k] = r.str();
  }
  r.expect_done();
  return p;
}

// ---- names ----

Guid NameDirectory::get_guid_by_name(const std::string& name) {
  Data d;
  try {
    d = at(key_for(name)).get(key_for(name));
  } catch (const Error& e) {
    if (is_not_found(e)) throw Error(ErrorCode::kNotFound, "unknown name \"" + name + "\"");
    throw;
  }
  ByteReader r(d);
  r.str();
  Guid g{r.key()};
  r.expect_done();
  return g;
}

void NameDirectory::associate_name(const std::string& name, const Guid& guid) {
  ByteWriter w;
  w.str(name).key(guid.key);
  at(key_for(name)).put(key_for(name), w.take());
}

// ---- versions ----

void VersionDirectory::publish_version(const Guid& guid, const Pid& pid) {
  ByteWriter w;
  w.key(pid.key).u64(sim_->now());
  at(guid.key).append(guid.key, w.take());
}

std::vector<VersionEntry> VersionDirectory::version_iterator(const Guid& guid) {
  std::vector<Data> log;
  try {
    log = at(guid.key).read_log(guid.key);
  } catch (const Error& e) {
    if (is_not_found(e)) return {};
    throw;
  }
  std::vector<VersionEntry> out;
  out.reserve(log.size());
  for (const auto& item : log) {
    ByteReader r(item);
    VersionEntry v{Pid{r.key()}, r.u64()};
    r.expect_done();
    out.push_back(v);
  }
  return out;
}

Pid VersionDirectory::get_latest_version(const Guid& guid) {
  auto log = version_iterator(guid);
  if (log.empty()) throw Error(ErrorCode::kNotFound, "no versions of " + guid.hex());
  return log.back().pid;
}

std::optional<CommitManifest> VersionDirectory::committed_snapshot(const Guid& root) {
  const Key k = snapshot_key(root);
  try {
    return CommitManifest::decode(at(k).get(k));
  } catch (const Error& e) {
    if (is_not_found(e)) return std::nullopt;
    throw;
  }
}

void VersionDirectory::publish_snapshot(const CommitManifest& manifest) {
  const Key k = snapshot_key(manifest.root);
  at(k).put(k, manifest.encode());
}

// ---- object directory ----

bool ObjectDirectory::reachable(const Simulation& sim, const ObjectLocation& loc) {
  if (!sim.has_node(loc.node)) return false;
  const Node& n = sim.node(loc.node);
  return n.live && n.incarnation == loc.incarnation && n.heap.contains(loc.local_id);
}

std::optional<InstanceRecord> ObjectDirectory::record(const Guid& guid) {
  try {
    return InstanceRecord::decode(at(guid.key).get(guid.key));
  } catch (const Error& e) {
    if (is_not_found(e)) return std::nullopt;
    throw;
  }
}

std::vector<InstanceLocation> ObjectDirectory::get_objects(const Guid& guid) {
  auto rec = record(guid);
  if (!rec) return {};
  std::vector<InstanceLocation> out;
  for (const auto& l : rec->locations)
    if (reachable(*sim_, l.location)) out.push_back(l);
  std::stable_sort(out.begin(), out.end(), [](const InstanceLocation& a, const InstanceLocation& b) {
    if (a.registered_at != b.registered_at) return a.registered_at < b.registered_at;
    return a.location.node < b.location.node;
  });
  return out;
}

void ObjectDirectory::publish_instance(const Guid& guid, const ObjectLocation& location) {
  InstanceRecord rec = record(guid).value_or(InstanceRecord{sim_->now(), {}});
  std::erase_if(rec.locations, [&](const InstanceLocation& l) {
    return l.location == location || !reachable(*sim_, l.location);
  });
  rec.locations.push_back(InstanceLocation{location, sim_->now()});
  at(guid.key).put(guid.key, rec.encode());
}

Guid ObjectDirectory::get_guid(ObjectNode& obj) {
  if (!obj.guid) obj.guid = sim_->guids().next();
  return *obj.guid;
}

std::uint64_t ObjectDirectory::get_creation_time(const Guid& guid) {
  auto rec = record(guid);
  if (!rec) throw Error(ErrorCode::kNotFound, "no instance record for " + guid.hex());
  return rec->creation_time;
}

// ---- data store ----

void DataStore::require_strategy(DataStrategy s, const char* op) const {
  if (sim_->config().data_strategy != s)
    throw Error(ErrorCode::kStrategyMismatch, std::string(op) + " is not available under this data-store strategy");
}

std::vector<std::string> DataStore::choose_repositories(const Pid& pid) const {
  auto names = sim_->repository_names();
  if (names.empty()) throw Error(ErrorCode::kInvalidArgument, "no external repositories configured");
  std::sort(names.begin(), names.end(), [&](const std::string& a, const std::string& b) {
    return digest(a + pid.hex()) < digest(b + pid.hex());
  });
  names.resize(std::min(names.size(), sim_->config().replication));
  return names;
}

void DataStore::store(const Pid& pid, const Data& data, std::size_t width) {
  if (generate_pid(data) != pid) throw Error(ErrorCode::kIntegrityError, "data does not hash to " + pid.hex());
  if (sim_->config().data_strategy == DataStrategy::kLocationRecording) {
    auto repos = choose_repositories(pid);
    for (const auto& name : repos) {
      auto& durable = *sim_->repository(name).durable;
      if (!durable.get(pid.key)) durable.put(StoredRecord{pid.key, EntryKind::kValue, {data}, 0, 0});
    }
    record_data_locations(pid, repos);
    return;
  }
  GenericStore& home = at(pid.key);
  Data payload;
  try {
    payload = home.get(pid.key);
  } catch (const Error& e) {
    if (!is_not_found(e)) throw;
    ByteWriter w;
    w.u8(kCoLocatedTag).u64(sim_->now()).raw(data);
    payload = w.take();
  }
  // Re-putting an existing entry keeps its creation time and tops up replicas.
  home.put(pid.key, payload, width);
}

Data DataStore::get_object_data(const Pid& pid) {
  Data payload;
  try {
    payload = at(pid.key).get(pid.key);
  } catch (const Error& e) {
    if (is_not_found(e)) throw Error(ErrorCode::kNotFound, "no data for " + pid.hex());
    throw;
  }
  ByteReader r(payload);
  const std::uint8_t tag = r.u8();
  r.u64();
  if (tag == kCoLocatedTag) {
    Data data = r.rest();
    if (generate_pid(data) != pid) throw Error(ErrorCode::kIntegrityError, "stored data does not hash to " + pid.hex());
    return data;
  }
  for (std::uint32_t n = r.u32(); n > 0; --n) {
    auto rec = sim_->repository(r.str()).durable->get(pid.key);
    if (rec && rec->live() && generate_pid(rec->items.front()) == pid) return rec->items.front();
  }
  throw Error(ErrorCode::kNotFound, "no repository holds " + pid.hex());
}

std::uint64_t DataStore::get_creation_time(const Pid& pid) {
  try {
    Data payload = at(pid.key).get(pid.key);
    ByteReader r(payload);
    r.u8();
    return r.u64();
  } catch (const Error& e) {
    if (is_not_found(e)) throw Error(ErrorCode::kNotFound, "no data for " + pid.hex());
    throw;
  }
}

std::vector<std::string> DataStore::get_store(const Pid& pid) {
  require_strategy(DataStrategy::kLocationRecording, "getStore");
  Data payload;
  try {
    payload = at(pid.key).get(pid.key);
  } catch (const Error& e) {
    if (is_not_found(e)) throw Error(ErrorCode::kNotFound, "no location record for " + pid.hex());
    throw;
  }
  ByteReader r(payload);
  if (r.u8() != kLocationTag) throw Error(ErrorCode::kDecodeError, "not a location record");
  r.u64();
  std::vector<std::string> out;
  for (std::uint32_t n = r.u32(); n > 0; --n) out.push_back(r.str());
  r.expect_done();
  return out;
}

void DataStore::record_data_locations(const Pid& pid, const std::vector<std::string>& repositories) {
  require_strategy(DataStrategy::kLocationRecording, "recordDataLocations");
  std::uint64_t created = sim_->now();
  std::vector<std::string> all;
  try {
    created = get_creation_time(pid);
    all = get_store(pid);
  } catch (const Error& e) {
    if (!is_not_found(e)) throw;
  }
  for (const auto& name : repositories) {
    sim_->repository(name);
    if (std::find(all.begin(), all.end(), name) == all.end()) all.push_back(name);
  }
  ByteWriter w;
  w.u8(kLocationTag).u64(created).u32(static_cast<std::uint32_t>(all.size()));
  for (const auto& name : all) w.str(name);
  at(pid.key).put(pid.key, w.take());
}

// ---- code store ----

std::string CodeStore::get_class_id(const Guid& guid) {
  try {
    const Data d = at(guid.key).get(guid.key);
    ByteReader r(d);
    return r.str();
  } catch (const Error& e) {
    if (is_not_found(e)) throw Error(ErrorCode::kNotFound, "no class recorded for " + guid.hex());
    throw;
  }
}

void CodeStore::register_class(const Guid& guid, const std::string& class_id) {
  try {
    const std::string existing = get_class_id(guid);
    if (existing == class_id) return;
    throw Error(ErrorCode::kImmutableViolation,
                guid.hex() + " is already registered as " + existing + ", not " + class_id);
  } catch (const Error& e) {
    if (!is_not_found(e)) throw;
  }
  ByteWriter w;
  w.str(class_id);
  at(guid.key).put(guid.key, w.take());
}

const ClassDescriptor& CodeStore::get_class(const Guid& guid) { return sim_->classes().get(get_class_id(guid)); }

// ---- policy store ----

void PolicyStore::set_resilience_policy(const PolicyScope& scope, const PolicyRecord& policy) {
  at(scope.key()).put(scope.key(), policy.encode());
}

PolicyRecord PolicyStore::default_policy() const {
  return PolicyRecord{"default", {{"replicas", std::to_string(sim_->config().replication)}}};
}

PolicyRecord PolicyStore::lookup_policy(const Guid& guid, const std::optional<std::string>& class_id) {
  std::vector<PolicyScope> scopes{PolicyScope::for_object(guid)};
  if (class_id) scopes.push_back(PolicyScope::for_class(*class_id));
  for (const auto& scope : scopes) {
    try {
      return PolicyRecord::decode(at(scope.key()).get(scope.key()));
    } catch (const Error& e) {
      if (!is_not_found(e)) throw;
    }
  }
  return default_policy();
}

// ---- maintenance ----

std::size_t purge_stale_instances(Simulation& sim) {
  std::size_t purged = 0;
  for (const auto& id : sim.all_nodes()) {
    Node& n = sim.node(id);
    if (!n.live) continue;
    GenericStore& store = n.store(Aid::kObjectDir);
    for (const auto& entry : store.get_all()) {
      if (sim.home_of(id, entry.key) != id) continue;
      InstanceRecord rec = InstanceRecord::decode(entry.items.front());
      const std::size_t before = rec.locations.size();
      std::erase_if(rec.locations,
                    [&](const InstanceLocation& l) { return !ObjectDirectory::reachable(sim, l.location); });
      if (rec.locations.size() == before) continue;
      purged += before - rec.locations.size();
      store.update(entry.key, rec.encode());
    }
  }
  return purged;
}

StabilizeResult quiesce(Simulation& sim) {
  StabilizeResult r = sim.stabilize();
  purge_stale_instances(sim);
  return r;
}

}  // namespace pstore
