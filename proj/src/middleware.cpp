#include "pstore/middleware.hpp"

#include <algorithm>

#include "pstore/error.hpp"

namespace pstore {

std::string_view resolution_kind_name(ResolutionKind kind) {
  switch (kind) {
    case ResolutionKind::kLocal: return "LOCAL";
    case ResolutionKind::kRemote: return "REMOTE";
    case ResolutionKind::kReinstantiated: return "REINSTANTIATED";
  }
  return "?";
}

namespace {

std::size_t field_slot(const ClassDescriptor& cls, std::string_view field) {
  auto idx = cls.field_index(field);
  if (!idx) throw Error(ErrorCode::kSchemaError, cls.class_id + " has no field " + std::string(field));
  return *idx;
}

}  // namespace

void assign_field(ObjectNode& obj, const ClassDescriptor& cls, std::string_view field, FieldValue value) {
  const std::size_t i = field_slot(cls, field);
  if (kind_of(value) != cls.fields[i].kind)
    throw Error(ErrorCode::kSchemaError, cls.class_id + "." + std::string(field) + " holds " +
                                             std::string(field_kind_name(cls.fields[i].kind)) + ", not " +
                                             std::string(field_kind_name(kind_of(value))));
  obj.fields[i] = std::move(value);
}

const FieldValue& field_value(const ObjectNode& obj, const ClassDescriptor& cls, std::string_view field) {
  return obj.fields[field_slot(cls, field)];
}

// ---- local heap ----

std::uint64_t Middleware::create(const std::string& class_id) {
  Node& n = sim_->deliver(self_);
  const std::uint64_t id = n.next_local_id++;
  n.heap.emplace(id, ObjectNode::blank(sim_->classes().get(class_id)));
  return id;
}

ObjectNode& Middleware::local(std::uint64_t local_id) {
  ObjectNode* obj = sim_->deliver(self_).find_local(local_id);
  if (!obj) throw Error(ErrorCode::kNotFound, "no local object " + std::to_string(local_id));
  return *obj;
}

Guid Middleware::guid_of(std::uint64_t local_id) {
  ObjectNode& obj = local(local_id);
  if (obj.guid) return *obj.guid;
  auto pi = infra();
  const Guid g = pi.objects().get_guid(obj);
  Node& n = sim_->deliver(self_);
  pi.objects().publish_instance(g, ObjectLocation{self_, n.incarnation, local_id});
  pi.code().register_class(g, obj.class_id);
  n.dirty.insert(g);
  return g;
}

void Middleware::set_local(std::uint64_t local_id, std::string_view field, FieldValue value,
                           const std::optional<TxnId>& txn) {
  ObjectNode& obj = local(local_id);
  assign_field(obj, sim_->classes().get(obj.class_id), field, std::move(value));
  if (obj.guid) record_write(*obj.guid, std::nullopt, txn, sim_->deliver(self_));
}

void Middleware::record_write(const Guid& guid, const std::optional<Guid>& root, const std::optional<TxnId>& txn,
                              Node& host) {
  host.dirty.insert(guid);
  if (!txn) return;
  Node* ledger_host = &host;
  if (root) {
    auto locs = infra().objects().get_objects(*root);
    if (!locs.empty()) ledger_host = &sim_->node(locs.front().location.node);
  }
  ledger_host->txn_ledger[guid].insert(*txn);
}

// ---- naming ----

void Middleware::associate_name(const std::string& name, std::uint64_t local_id) {
  const Guid g = guid_of(local_id);
  infra().names().associate_name(name, g);
}

AbstractRef Middleware::get_object_by_name(const std::string& name) {
  const Guid g = infra().names().get_guid_by_name(name);
  return AbstractRef{g, g, {}, {}};
}

// ---- resolution ----

Node& Middleware::host_of(const ObjectLocation& location) { return sim_->deliver(location.node); }

ObjectNode* Middleware::target_object(const ResolvedTarget& target) {
  if (!ObjectDirectory::reachable(*sim_, target.location)) return nullptr;
  return host_of(target.location).find_local(target.location.local_id);
}

PolicyRecord Middleware::policy_for(const Guid& guid) {
  auto pi = infra();
  std::optional<std::string> cls;
  try {
    cls = pi.code().get_class_id(guid);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNotFound) throw;
  }
  return pi.policies().lookup_policy(guid, cls);
}

const PolicyBehavior& Middleware::behavior(const PolicyRecord& record) const { return policies_->get(record.name); }

ResolvedTarget Middleware::resolve(const Guid& guid, const std::optional<Guid>& root) {
  auto pi = infra();
  const auto locs = pi.objects().get_objects(guid);
  for (const auto& l : locs)
    if (l.location.node == self_) return ResolvedTarget{ResolutionKind::kLocal, l.location};
  if (!locs.empty()) return ResolvedTarget{ResolutionKind::kRemote, locs.front().location};

  const PolicyRecord policy = policy_for(guid);
  const PolicyBehavior& b = behavior(policy);
  ObjectNode obj = b.instantiate ? b.instantiate(*this, guid, root, policy.params) : default_instantiate(guid, root);
  obj.guid = guid;
  Node& n = sim_->deliver(self_);
  const std::uint64_t id = n.next_local_id++;
  n.heap.emplace(id, std::move(obj));
  const ObjectLocation loc{self_, n.incarnation, id};
  pi.objects().publish_instance(guid, loc);
  return ResolvedTarget{ResolutionKind::kReinstantiated, loc};
}

ObjectNode Middleware::default_instantiate(const Guid& guid, const std::optional<Guid>& root) {
  auto pi = infra();
  Pid pid;
  if (root) {
    auto manifest = pi.versions().committed_snapshot(*root);
    if (!manifest || !manifest->snapshot.contains(guid))
      throw Error(ErrorCode::kUnresolvable, guid.hex() + " has no committed state under root " + root->hex());
    pid = manifest->snapshot.at(guid);
  } else {
    try {
      pid = pi.versions().get_latest_version(guid);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNotFound) throw;
      throw Error(ErrorCode::kUnresolvable, guid.hex() + " has no instance and no versions");
    }
  }
  try {
    Data data = pi.data().get_object_data(pid);
    const ClassDescriptor& cls = pi.code().get_class(guid);
    return instantiate_object(data, cls);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNotFound) throw;
    throw Error(ErrorCode::kDataLoss, "state " + pid.hex() + " of " + guid.hex() + " is lost: " + e.what());
  }
}

template <typename Fn>
auto Middleware::with_target(AbstractRef& ref, Fn&& fn) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (!ref.cache) {
      ref.cache = resolve(ref.guid, ref.root);
      ref.last_kind = ref.cache->kind;
    }
    if (ObjectNode* obj = target_object(*ref.cache)) return fn(*obj, host_of(ref.cache->location));
    // The host is gone or restarted: drop the hint and resolve once more.
    ref.cache.reset();
  }
  throw Error(ErrorCode::kUnresolvable, "target of " + ref.guid.hex() + " vanished twice");
}

AbstractRef Middleware::child(AbstractRef& parent, std::string_view field) {
  FieldValue v = read_field(parent, field);
  const Ref* r = std::get_if<Ref>(&v);
  if (!r) throw Error(ErrorCode::kSchemaError, std::string(field) + " is not a reference field");
  if (!*r) throw Error(ErrorCode::kUnresolvable, std::string(field) + " is null");
  return AbstractRef{**r, parent.root, {}, {}};
}

FieldValue Middleware::read_field(AbstractRef& ref, std::string_view field) {
  return with_target(ref, [&](ObjectNode& obj, Node&) {
    return field_value(obj, sim_->classes().get(obj.class_id), field);
  });
}

void Middleware::write_field(AbstractRef& ref, std::string_view field, FieldValue value,
                             const std::optional<TxnId>& txn) {
  with_target(ref, [&](ObjectNode& obj, Node& host) {
    assign_field(obj, sim_->classes().get(obj.class_id), field, std::move(value));
    record_write(ref.guid, ref.root, txn, host);
    return 0;
  });
}

ObjectNode Middleware::read_object(AbstractRef& ref) {
  return with_target(ref, [](ObjectNode& obj, Node&) { return obj; });
}

std::vector<ObjectState> Middleware::read_closure(const std::string& name) {
  AbstractRef root = get_object_by_name(name);
  ObjectNode root_obj = read_object(root);
  ChildResolver resolver = [&](const Guid& g) -> const ObjectNode* {
    AbstractRef r{g, root.root, {}, {}};
    return with_target(r, [](ObjectNode& obj, Node&) { return static_cast<const ObjectNode*>(&obj); });
  };
  std::vector<ObjectState> out;
  for (const auto* o : closure(root_obj, resolver)) out.emplace_back(*o->guid, *o);
  return out;
}

std::vector<ObjectState> Middleware::read_committed_closure(const std::string& name) {
  auto pi = infra();
  const Guid root = pi.names().get_guid_by_name(name);
  auto manifest = pi.versions().committed_snapshot(root);
  std::vector<ObjectState> out;
  if (!manifest) return out;
  for (const auto& [g, pid] : manifest->snapshot) {
    Data data;
    try {
      data = pi.data().get_object_data(pid);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNotFound) throw;
      throw Error(ErrorCode::kDataLoss, "committed state " + pid.hex() + " is lost");
    }
    ObjectNode obj = instantiate_object(data, pi.code().get_class(g));
    obj.guid = g;
    out.emplace_back(g, std::move(obj));
  }
  return out;
}

// ---- commit ----

Data Middleware::default_reify(const ObjectNode& obj) { return reify(obj, sim_->classes().get(obj.class_id)); }

Data Middleware::reify_object(const ObjectNode& obj) {
  if (obj.guid) {
    const PolicyRecord policy = policy_for(*obj.guid);
    const PolicyBehavior& b = behavior(policy);
    if (b.reify) return b.reify(*this, obj, policy.params);
  }
  return default_reify(obj);
}

std::vector<ObjectNode*> Middleware::collect_closure(const Guid& root, const ClosureFilter& include) {
  AbstractRef root_ref{root, root, {}, {}};
  ObjectNode* root_obj = with_target(root_ref, [](ObjectNode& o, Node&) { return &o; });
  ChildResolver resolver = [&](const Guid& g) -> const ObjectNode* {
    AbstractRef r{g, root, {}, {}};
    try {
      return with_target(r, [](ObjectNode& o, Node&) { return static_cast<const ObjectNode*>(&o); });
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kUnresolvable || e.code() == ErrorCode::kDataLoss) return nullptr;
      throw;
    }
  };
  std::vector<ObjectNode*> out;
  for (const auto* o : closure(*root_obj, resolver, include)) out.push_back(const_cast<ObjectNode*>(o));
  return out;
}

CommitResult Middleware::publish_commit(const Guid& root, const std::vector<const ObjectNode*>& writes,
                                        const CommitManifest& manifest, std::size_t width,
                                        const CommitOptions& options) {
  CommitResult result;
  result.manifest = manifest;
  result.root_pid = manifest.snapshot.at(root);

  // Serialize everything before the first externally visible write.
  std::vector<std::pair<Guid, Data>> states;
  for (const auto* o : writes) states.emplace_back(*o->guid, reify_object(*o));

  auto step = [&] {
    ++result.steps;
    if (options.crash_after_step && result.steps == *options.crash_after_step) {
      sim_->fail(self_);
      throw Error(ErrorCode::kNodeCrashed, "committing node crashed after step " + std::to_string(result.steps));
    }
  };
  if (options.crash_after_step && *options.crash_after_step == 0) {
    sim_->fail(self_);
    throw Error(ErrorCode::kNodeCrashed, "committing node crashed before the first step");
  }

  auto pi = infra();
  for (const auto& [g, data] : states) {
    const Pid pid = generate_pid(data);
    pi.data().store(pid, data, width);
    step();
    pi.versions().publish_version(g, pid);
    ++result.stored;
    step();
  }
  pi.versions().publish_snapshot(manifest);
  step();

  for (const auto* o : writes) {
    for (const auto& id : sim_->all_nodes()) {
      Node& n = sim_->node(id);
      if (n.live) n.dirty.erase(*o->guid);
    }
  }
  return result;
}

CommitResult Middleware::default_make_resilient(const Guid& root, const CommitOptions& options,
                                                const PolicyParams& params, const ClosureFilter& include) {
  auto members = collect_closure(root, include);
  CommitManifest manifest{root, {}};
  std::vector<const ObjectNode*> writes;
  for (const auto* m : members) {
    writes.push_back(m);
    manifest.snapshot[*m->guid] = generate_pid(reify_object(*m));
  }
  if (writes.empty()) throw Error(ErrorCode::kInvalidArgument, "root excluded from its own closure");
  CommitResult result = publish_commit(root, writes, manifest, replicas_param(params, sim_->config().replication),
                                       options);
  auto& ledger = sim_->deliver(self_).txn_ledger;
  for (const auto* m : members) ledger.erase(*m->guid);
  return result;
}

CommitResult Middleware::commit(const std::string& name, const CommitOptions& options) {
  return commit_root(infra().names().get_guid_by_name(name), options);
}

CommitResult Middleware::commit_root(const Guid& root, const CommitOptions& options) {
  // makeResilient runs where the root lives; that node also keeps the ledger.
  const ResolvedTarget where = resolve(root, root);
  if (where.location.node != self_) return Middleware(*sim_, *policies_, where.location.node).commit_root(root, options);
  const PolicyRecord policy = policy_for(root);
  const PolicyBehavior& b = behavior(policy);
  if (b.make_resilient) return b.make_resilient(*this, root, options, policy.params);
  return default_make_resilient(root, options, policy.params);
}

}  // namespace pstore
