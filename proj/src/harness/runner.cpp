#include "pstore/harness/runner.hpp"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "pstore/error.hpp"

namespace pstore::harness {

namespace fs = std::filesystem;

namespace {

constexpr const char* kMarker = ".pstore-sim";

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::string trim_copy(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  while (true) {
    auto pos = s.find(sep);
    out.push_back(trim_copy(s.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

// Arguments of `fn(a, b)` when `expr` has that shape.
std::optional<std::vector<std::string>> call_args(std::string_view expr, std::string_view fn) {
  if (!expr.starts_with(fn) || expr.size() < fn.size() + 2 || expr[fn.size()] != '(' || expr.back() != ')')
    return std::nullopt;
  return split(expr.substr(fn.size() + 1, expr.size() - fn.size() - 2), ',');
}

// Starts a durable directory from scratch, refusing to touch anything that
// was not created by a previous run.
void prepare_durable_dir(const fs::path& dir) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw std::runtime_error(dir.string() + " is not a directory");
    if (!fs::is_empty(dir) && !fs::exists(dir / kMarker))
      throw std::runtime_error(dir.string() + " is not empty and was not created by pstore");
    fs::remove_all(dir);
  }
  fs::create_directories(dir);
  std::ofstream(dir / kMarker) << "pstore simulation durable root\n";
}

json error_json(const Error& e) { return json{{"status", "error"}, {"error", std::string(to_string(e.code()))}}; }

std::map<Guid, Pid> state_pids(const std::vector<ObjectState>& states, const ClassRegistry& classes) {
  std::map<Guid, Pid> out;
  for (const auto& [g, obj] : states) out[g] = generate_pid(reify(obj, classes.get(obj.class_id)));
  return out;
}

}  // namespace

struct Runner::Path {
  NodeId node;
  std::optional<std::uint64_t> local;  // direct heap access on `node`
  AbstractRef* ref = nullptr;          // a binding's own reference
  std::optional<AbstractRef> temp;     // a reference reached through fields

  AbstractRef* target() { return temp ? &*temp : ref; }
};

Runner::Runner(Scenario scenario, RunOptions options)
    : scenario_(std::move(scenario)), options_(std::move(options)), policies_(PolicyRegistry::with_builtins()) {
  SimulationConfig cfg;
  cfg.seed = scenario_.seed;
  cfg.replication = scenario_.replication;
  cfg.data_strategy = scenario_.data_strategy;
  cfg.repositories = scenario_.repositories;
  const std::string durability = options_.durable.value_or(scenario_.durability);
  if (durability.starts_with("dir:")) {
    cfg.durable_dir = fs::path(durability.substr(4));
    prepare_durable_dir(*cfg.durable_dir);
  } else if (durability != "mem") {
    throw std::invalid_argument("durability must be mem or dir:<path>");
  }
  for (const auto& decl : scenario_.policies)
    if (!policies_.contains(decl.name)) throw ParseError(decl.line, "unknown policy " + decl.name);

  sim_ = std::make_unique<Simulation>(cfg);
  for (const auto& cls : scenario_.classes) sim_->classes().add(cls);
  for (std::size_t i = 0; i < scenario_.nodes; ++i) {
    sim_->join("n" + std::to_string(i));
    quiesce(*sim_);
  }
  auto pi = PersistenceInfrastructure(*sim_, reader());
  for (const auto& decl : scenario_.policies)
    if (decl.scope == PolicyScope::Kind::kClass)
      pi.policies().set_resilience_policy(PolicyScope::for_class(decl.target), PolicyRecord{decl.name, decl.params});
}

Runner::~Runner() = default;

NodeId Runner::node_named(const std::string& name) const {
  try {
    return sim_->id_of(name);
  } catch (const Error&) {
    return Simulation::node_id_for(name);
  }
}

NodeId Runner::reader(const std::optional<NodeId>& preferred) const {
  if (preferred && sim_->is_live(*preferred)) return *preferred;
  return sim_->first_live();
}

std::optional<NodeId> Runner::on_node(const Event& ev) const {
  auto on = ev.opt("on");
  if (!on) return std::nullopt;
  NodeId id = node_named(*on);
  if (!sim_->has_node(id)) throw Error(ErrorCode::kNotFound, "unknown node " + *on);
  return id;
}

void Runner::apply_policies_for(const std::string& root_name, const Guid& guid) {
  for (const auto& decl : scenario_.policies) {
    if (decl.scope != PolicyScope::Kind::kObject || decl.target != root_name) continue;
    PersistenceInfrastructure(*sim_, reader())
        .policies()
        .set_resilience_policy(PolicyScope::for_object(guid), PolicyRecord{decl.name, decl.params});
  }
}

Guid Runner::guid_of_alias(const std::string& alias) {
  auto it = aliases_.find(alias);
  if (it == aliases_.end()) throw Error(ErrorCode::kNotFound, "unknown alias " + alias);
  Binding& b = it->second;
  if (b.ref) return b.ref->guid;
  if (b.local_id && sim_->is_live(b.node) && sim_->node(b.node).incarnation == b.incarnation) {
    const Guid g = middleware(b.node).guid_of(*b.local_id);
    b.ref = AbstractRef{g, std::nullopt, {}, {}};
    return g;
  }
  throw Error(ErrorCode::kUnresolvable, alias + " was never published and its host is gone");
}

Runner::Path Runner::resolve_path(const std::string& path, const std::optional<NodeId>& on) {
  auto parts = split(path, '.');
  auto it = aliases_.find(parts[0]);
  if (it == aliases_.end()) throw Error(ErrorCode::kNotFound, "unknown alias " + parts[0]);
  Binding& b = it->second;

  Path p;
  p.node = reader(on ? on : std::optional<NodeId>(b.node));
  const bool host_up = b.local_id && sim_->is_live(b.node) && sim_->node(b.node).incarnation == b.incarnation;
  if (!b.ref && host_up && p.node != b.node) guid_of_alias(parts[0]);
  if (b.ref) {
    p.ref = &*b.ref;
  } else if (host_up) {
    p.local = b.local_id;
  } else {
    throw Error(ErrorCode::kUnresolvable, parts[0] + " was never published and its host is gone");
  }

  Middleware mw = middleware(p.node);
  for (std::size_t i = 1; i < parts.size(); ++i) {
    if (p.local) {
      const ObjectNode& obj = mw.local(*p.local);
      const FieldValue& v = field_value(obj, sim_->classes().get(obj.class_id), parts[i]);
      const Ref* r = std::get_if<Ref>(&v);
      if (!r) throw Error(ErrorCode::kSchemaError, parts[i] + " is not a reference field");
      if (!*r) throw Error(ErrorCode::kUnresolvable, parts[i] + " is null");
      p.temp = AbstractRef{**r, std::nullopt, {}, {}};
      p.local.reset();
    } else {
      p.temp = mw.child(*p.target(), parts[i]);
    }
  }
  return p;
}

FieldValue Runner::read_path(const std::string& path, const std::optional<NodeId>& on) {
  auto dot = path.rfind('.');
  if (dot == std::string::npos) throw Error(ErrorCode::kSchemaError, "expected <alias>.<field>, got " + path);
  Path p = resolve_path(path.substr(0, dot), on);
  const std::string field = path.substr(dot + 1);
  Middleware mw = middleware(p.node);
  if (p.local) {
    const ObjectNode& obj = mw.local(*p.local);
    return field_value(obj, sim_->classes().get(obj.class_id), field);
  }
  return mw.read_field(*p.target(), field);
}

void Runner::write_path(const std::string& path, FieldValue value, const std::optional<TxnId>& txn,
                        const std::optional<NodeId>& on) {
  auto dot = path.rfind('.');
  if (dot == std::string::npos) throw Error(ErrorCode::kSchemaError, "expected <alias>.<field>, got " + path);
  Path p = resolve_path(path.substr(0, dot), on);
  const std::string field = path.substr(dot + 1);
  Middleware mw = middleware(p.node);
  if (p.local)
    mw.set_local(*p.local, field, std::move(value), txn);
  else
    mw.write_field(*p.target(), field, std::move(value), txn);
}

FieldValue Runner::parse_value(const std::string& token, const std::optional<NodeId>&) {
  if (is_quoted(token)) return unquote(token);
  if (token == "null") return Ref{};
  if (token.starts_with("&")) return Ref{guid_of_alias(token.substr(1))};
  if (auto v = parse_int(token)) return *v;
  throw Error(ErrorCode::kInvalidArgument, "cannot parse value " + token);
}

json Runner::execute(const Event& ev, std::optional<std::size_t> crash_after_step) {
  const auto on = on_node(ev);
  const std::string& a = ev.action;
  json out{{"status", "ok"}};

  if (a == "CREATE") {
    const NodeId node = on.value_or(reader());
    Middleware mw = middleware(node);
    const std::uint64_t id = mw.create(ev.args[1]);
    aliases_[ev.args[0]] = Binding{node, id, sim_->node(node).incarnation, std::nullopt};
    for (const auto& [k, v] : ev.opts)
      if (k != "on") mw.set_local(id, k, parse_value(v, on));
    out["node"] = sim_->name_of(node);
  } else if (a == "SET") {
    write_path(ev.args[0], parse_value(ev.args[1], on), ev.opt("txn"), on);
  } else if (a == "TRANSFER") {
    const std::int64_t amount = *parse_int(ev.args[2]);
    const std::string part = ev.opt("part").value_or("both");
    const auto txn = ev.opt("txn");
    if (part != "credit") {
      auto v = std::get<std::int64_t>(read_path(ev.args[0] + ".balance", on));
      write_path(ev.args[0] + ".balance", v - amount, txn, on);
    }
    if (part != "debit") {
      auto v = std::get<std::int64_t>(read_path(ev.args[1] + ".balance", on));
      write_path(ev.args[1] + ".balance", v + amount, txn, on);
    }
  } else if (a == "ASSOCIATE") {
    const std::string name = unquote(ev.args[0]);
    auto it = aliases_.find(ev.args[1]);
    if (it == aliases_.end()) throw Error(ErrorCode::kNotFound, "unknown alias " + ev.args[1]);
    Guid g;
    if (it->second.local_id && !it->second.ref && sim_->is_live(it->second.node)) {
      middleware(it->second.node).associate_name(name, *it->second.local_id);
      g = guid_of_alias(ev.args[1]);
    } else {
      g = guid_of_alias(ev.args[1]);
      PersistenceInfrastructure(*sim_, reader(on)).names().associate_name(name, g);
    }
    apply_policies_for(name, g);
    if (std::find(names_.begin(), names_.end(), name) == names_.end()) names_.push_back(name);
    out["guid"] = g.hex();
  } else if (a == "COMMIT") {
    CommitOptions opts;
    opts.txn = ev.opt("txn");
    if (crash_after_step)
      opts.crash_after_step = crash_after_step;
    else if (auto k = ev.opt("crashAfterStep"))
      opts.crash_after_step = static_cast<std::size_t>(*parse_int(*k));
    try {
      CommitResult r = middleware(on.value_or(reader())).commit(unquote(ev.args[0]), opts);
      out["root_pid"] = r.root_pid.hex();
      out["steps"] = r.steps;
      out["stored"] = r.stored;
      last_commit_ = out;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNodeCrashed) throw;
      out = json{{"status", "crashed"}, {"after_step", *opts.crash_after_step}};
      last_commit_ = out;
    }
  } else if (a == "GET") {
    const NodeId node = on.value_or(reader());
    AbstractRef ref = middleware(node).get_object_by_name(unquote(ev.args[1]));
    out["guid"] = ref.guid.hex();
    aliases_[ev.args[0]] = Binding{node, std::nullopt, 0, ref};
  } else if (a == "READ") {
    out["value"] = format_value(read_path(ev.args[0], on));
  } else if (a == "FAIL") {
    sim_->fail(node_named(ev.args[0]));
  } else if (a == "JOIN") {
    sim_->join(ev.args[0]);
  } else if (a == "DISK_WIPE") {
    sim_->disk_wipe(node_named(ev.args[0]));
  } else if (a == "STABILIZE") {
    StabilizeResult r = quiesce(*sim_);
    out["rounds"] = r.routing_rounds;
    out["repaired"] = r.repaired_copies;
  } else if (a == "RESTART") {
    sim_->restart_all();
    purge_stale_instances(*sim_);
    Middleware mw = middleware(reader());
    json recovery = json::array();
    bool all = true;
    for (const auto& name : names_) {
      json r{{"name", name}};
      try {
        auto manifest = mw.infra().versions().committed_snapshot(mw.infra().names().get_guid_by_name(name));
        auto states = mw.read_committed_closure(name);
        const bool match = manifest && state_pids(states, sim_->classes()) == manifest->snapshot;
        r["members"] = states.size();
        r["match"] = match;
        all = all && match;
      } catch (const Error& e) {
        r["match"] = false;
        r["error"] = std::string(to_string(e.code()));
        all = false;
      }
      recovery.push_back(r);
    }
    out["recovery"] = recovery;
    out["recovered"] = all;
  } else if (a == "ASSERT") {
    return evaluate_assert(ev);
  }
  return out;
}

json Runner::evaluate_assert(const Event& ev) {
  const auto eq = ev.expr.find("==");
  const std::string lhs = trim_copy(std::string_view(ev.expr).substr(0, eq));
  const std::string rhs = unquote(trim_copy(std::string_view(ev.expr).substr(eq + 2)));
  std::string actual;
  try {
    if (auto args = call_args(lhs, "sum")) {
      std::int64_t total = 0;
      for (const auto& p : *args) {
        FieldValue v = read_path(p, std::nullopt);
        const auto* i = std::get_if<std::int64_t>(&v);
        if (!i) throw Error(ErrorCode::kSchemaError, p + " is not an INT field");
        total += *i;
      }
      actual = std::to_string(total);
    } else if (auto args = call_args(lhs, "committed_sum")) {
      if (args->size() != 2) throw Error(ErrorCode::kInvalidArgument, "committed_sum(name, field)");
      std::int64_t total = 0;
      for (const auto& [g, obj] : middleware(reader()).read_committed_closure(unquote((*args)[0]))) {
        const auto& cls = sim_->classes().get(obj.class_id);
        if (auto idx = cls.field_index((*args)[1]); idx && cls.fields[*idx].kind == FieldKind::kInt)
          total += std::get<std::int64_t>(obj.fields[*idx]);
      }
      actual = std::to_string(total);
    } else if (auto args = call_args(lhs, "replicas")) {
      // Privileged census over the data-store copies of the committed closure.
      Middleware mw = middleware(reader());
      auto manifest = mw.infra().versions().committed_snapshot(mw.infra().names().get_guid_by_name(
          unquote(args->at(0))));
      if (!manifest) throw Error(ErrorCode::kNotFound, "nothing committed under " + args->at(0));
      const auto copies = sim_->copies(Aid::kDataStore);
      std::size_t lo = SIZE_MAX, hi = 0;
      for (const auto& [g, pid] : manifest->snapshot) {
        auto it = copies.find(pid.key);
        const std::size_t n = it == copies.end() ? 0 : it->second.size();
        lo = std::min(lo, n);
        hi = std::max(hi, n);
      }
      actual = lo == hi ? std::to_string(lo) : std::to_string(lo) + ".." + std::to_string(hi);
    } else if (auto args = call_args(lhs, "versions")) {
      Path p = resolve_path(args->at(0), std::nullopt);
      Guid g = p.local ? guid_of_alias(split(args->at(0), '.')[0]) : p.target()->guid;
      actual = std::to_string(middleware(p.node).infra().versions().version_iterator(g).size());
    } else if (auto args = call_args(lhs, "kind")) {
      Path p = resolve_path(args->at(0), std::nullopt);
      if (p.local) {
        actual = "LOCAL";
      } else {
        middleware(p.node).read_object(*p.target());
        actual = std::string(resolution_kind_name(*p.target()->last_kind));
      }
    } else if (auto args = call_args(lhs, "error")) {
      try {
        read_path(args->at(0), std::nullopt);
        actual = "OK";
      } catch (const Error& e) {
        actual = std::string(to_string(e.code()));
      }
    } else if (lhs == "placement") {
      PlacementCheck c = sim_->check_placement();
      actual = c.violations == 0 ? "ok" : std::to_string(c.violations) + " violations";
    } else {
      actual = format_value(read_path(lhs, std::nullopt));
    }
  } catch (const Error& e) {
    actual = "ERROR:" + std::string(to_string(e.code()));
  }
  const bool pass = actual == rhs;
  if (!pass) ++failed_asserts_;
  json out{{"status", pass ? "pass" : "fail"}, {"expected", rhs}, {"actual", actual}};
  asserts_.push_back(json{{"tick", ev.tick}, {"line", ev.line}, {"expr", ev.expr}, {"expected", rhs},
                          {"actual", actual}, {"pass", pass}});
  return out;
}

void Runner::run_event(const Event& ev, std::optional<std::size_t> crash_after_step) {
  sim_->advance_to(ev.tick);
  json rec{{"tick", ev.tick}, {"action", ev.action}, {"text", ev.text}};
  json result;
  try {
    result = execute(ev, crash_after_step);
  } catch (const Error& e) {
    result = error_json(e);
  }
  rec.update(result);
  events_.push_back(std::move(rec));
}

void Runner::run_range(std::size_t begin, std::size_t end) {
  for (std::size_t i = begin; i < end && i < scenario_.events.size(); ++i) run_event(scenario_.events[i]);
}

json Runner::census() const {
  json services = json::object();
  for (Aid aid : kAllAids) {
    const auto copies = sim_->copies(aid);
    std::size_t lo = copies.empty() ? 0 : SIZE_MAX, hi = 0, total = 0;
    for (const auto& [k, holders] : copies) {
      lo = std::min(lo, holders.size());
      hi = std::max(hi, holders.size());
      total += holders.size();
    }
    services[std::string(aid_name(aid))] =
        json{{"keys", copies.size()}, {"copies", total}, {"min_copies", lo}, {"max_copies", hi}};
  }
  std::map<Key, std::size_t> logs;
  std::set<Key> manifests;
  for (const auto& id : sim_->all_nodes()) {
    const Node& n = sim_->node(id);
    if (!n.live) continue;
    for (const auto& r : n.store(Aid::kVersionDir).durable().all()) {
      if (r.kind == EntryKind::kAppendLog)
        logs[r.key] = std::max(logs[r.key], r.items.size());
      else if (r.kind == EntryKind::kValue)
        manifests.insert(r.key);
    }
  }
  std::size_t entries = 0, longest = 0;
  for (const auto& [k, n] : logs) {
    entries += n;
    longest = std::max(longest, n);
  }
  json live = json::array();
  for (const auto& id : sim_->all_nodes())
    if (sim_->is_live(id)) live.push_back(sim_->name_of(id));
  const PlacementCheck placement = sim_->check_placement();
  return json{{"live_nodes", live},
              {"services", services},
              {"version_logs", json{{"logs", logs.size()}, {"entries", entries}, {"longest", longest}}},
              {"manifests", manifests.size()},
              {"placement_violations", placement.violations}};
}

json Runner::report() const {
  const HopStats& hops = sim_->overlay().hop_stats();
  const std::string durability = options_.durable.value_or(scenario_.durability);
  json cfg{{"nodes", scenario_.nodes},
           {"replication", scenario_.replication},
           {"durability", durability.starts_with("dir:") ? "dir" : "mem"},
           {"datastore", scenario_.data_strategy == DataStrategy::kCoLocated ? "co-located" : "location-recording"}};
  std::size_t passed = 0;
  for (const auto& a : asserts_) passed += a["pass"].get<bool>() ? 1 : 0;
  return json{{"v", 1},
              {"scenario", scenario_.name},
              {"seed", scenario_.seed},
              {"config", cfg},
              {"events", events_},
              {"assertions", asserts_},
              {"summary", json{{"asserts", asserts_.size()}, {"passed", passed}, {"failed", failed_asserts_}}},
              {"census", census()},
              {"routing", json{{"lookups", hops.lookups},
                               {"total_hops", hops.total_hops},
                               {"max_hops", hops.max_hops},
                               {"mean_hops", std::round(hops.mean() * 1000.0) / 1000.0}}},
              {"passed", passed == asserts_.size()}};
}

// ---- operations ----

Outcome run_scenario(const Scenario& scenario, const RunOptions& options) {
  Runner r(scenario, options);
  r.run_all();
  return Outcome{r.report(), r.passed() ? 0 : 1};
}

Outcome sweep_crash_points(const Scenario& scenario, std::size_t commit_index, const RunOptions& options) {
  std::optional<std::size_t> at;
  for (std::size_t i = 0, seen = 0; i < scenario.events.size(); ++i) {
    if (scenario.events[i].action != "COMMIT") continue;
    if (seen++ == commit_index) {
      at = i;
      break;
    }
  }
  if (!at) throw std::invalid_argument("scenario has no COMMIT number " + std::to_string(commit_index));
  const Event& commit = scenario.events[*at];
  const std::string name = unquote(commit.args[0]);

  auto options_for = [&](const std::string& tag) {
    RunOptions o = options;
    const std::string d = o.durable.value_or(scenario.durability);
    if (d.starts_with("dir:")) o.durable = "dir:" + (fs::path(d.substr(4)) / tag).string();
    return o;
  };
  auto committed = [&](Runner& r) {
    try {
      return state_pids(r.middleware(r.reader()).read_committed_closure(name), r.sim().classes());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNotFound) throw;
      return std::map<Guid, Pid>{};
    }
  };

  Runner base(scenario, options_for("base"));
  base.run_range(0, *at);
  const auto old_state = committed(base);
  base.run_event(commit, std::nullopt);
  const auto new_state = committed(base);
  const json& done = base.last_commit();
  if (!done.contains("steps")) throw std::invalid_argument("the selected COMMIT does not complete without a crash");
  const std::size_t steps = done["steps"].get<std::size_t>();

  json runs = json::array();
  std::size_t mixed = 0;
  for (std::size_t k = 0; k <= steps; ++k) {
    Runner r(scenario, options_for("crash-" + std::to_string(k)));
    r.run_range(0, *at);
    r.run_event(commit, k);
    quiesce(r.sim());
    std::map<Guid, Pid> seen;
    json run{{"crash_after_step", k}};
    try {
      seen = state_pids(r.middleware(r.reader()).read_closure(name), r.sim().classes());
    } catch (const Error& e) {
      run["read_error"] = std::string(to_string(e.code()));
    }
    std::string verdict = seen == old_state ? "OLD" : seen == new_state ? "NEW" : "MIXED";
    if (verdict == "MIXED") ++mixed;
    run["outcome"] = verdict;
    run["members_read"] = seen.size();
    runs.push_back(run);
  }
  json report{{"v", 1},
              {"scenario", scenario.name},
              {"seed", scenario.seed},
              {"commit_index", commit_index},
              {"commit", commit.text},
              {"steps", steps},
              {"old_members", old_state.size()},
              {"new_members", new_state.size()},
              {"runs", runs},
              {"mixed", mixed}};
  return Outcome{report, mixed == 0 ? 0 : 1};
}

Outcome restart_all(const Scenario& scenario, std::uint64_t split_tick, const RunOptions& options) {
  RunOptions o = options;
  std::optional<fs::path> scratch;
  if (!o.durable.value_or(scenario.durability).starts_with("dir:")) {
    scratch = fs::temp_directory_path() / ("pstore-restart-" + std::to_string(::getpid()));
    o.durable = "dir:" + scratch->string();
  }
  Scenario sc = scenario;
  Event restart;
  restart.tick = split_tick;
  restart.action = "RESTART";
  restart.text = "@" + std::to_string(split_tick) + " RESTART";
  auto pos = std::find_if(sc.events.begin(), sc.events.end(), [&](const Event& e) { return e.tick >= split_tick; });
  if (pos != sc.events.end() && pos->tick == split_tick)
    throw std::invalid_argument("tick " + std::to_string(split_tick) + " is already taken by an event");
  sc.events.insert(pos, restart);

  Outcome out;
  {
    Runner r(sc, o);
    r.run_all();
    out.report = r.report();
    bool recovered = true;
    for (const auto& ev : out.report["events"])
      if (ev["action"] == "RESTART") recovered = recovered && ev.value("recovered", false);
    // A split with nothing committed yet has nothing to recover and passes.
    out.report["recovered"] = recovered;
    out.exit_code = r.passed() && recovered ? 0 : 1;
  }
  if (scratch) fs::remove_all(*scratch);
  return out;
}

Outcome enumerate_interleavings(const std::string& policy, std::uint64_t seed) {
  std::ostringstream head;
  head << "seed=" << seed << "\nnodes=5\nreplication=3\n"
       << "class Bank a:REF b:REF c:REF d:REF\nclass Account id:STRING balance:INT\n";
  if (policy != "default") head << "policy " << policy << " scope=object:\"bank root\"\n";
  if (policy == "optimistic") head << "policy none scope=class:Account\n";
  head << "@1 CREATE A Account id=\"A\" balance=100\n@2 CREATE B Account id=\"B\" balance=100\n"
       << "@3 CREATE C Account id=\"C\" balance=100\n@4 CREATE D Account id=\"D\" balance=100\n"
       << "@5 CREATE bank Bank a=&A b=&B c=&C d=&D\n@6 ASSOCIATE \"bank root\" bank\n"
       << "@7 COMMIT \"bank root\"\n@8 GET t1 \"bank root\"\n@9 GET t2 \"bank root\"\n";
  const std::int64_t initial = 400;

  const char* labels[2][3] = {{"1:debit", "1:credit", "1:commit"}, {"2:debit", "2:credit", "2:commit"}};
  auto op_text = [](int thread, int step) -> std::string {
    const std::string t = thread == 0 ? "t1" : "t2";
    const std::string from = t + (thread == 0 ? ".a" : ".c");
    const std::string to = t + (thread == 0 ? ".b" : ".d");
    if (step == 2) return "COMMIT \"bank root\" txn=" + t;
    return "TRANSFER " + from + " " + to + " 10 txn=" + t + (step == 0 ? " part=debit" : " part=credit");
  };

  json runs = json::array();
  std::size_t violations = 0, total = 0;
  // Every 6-step schedule with three steps per thread in program order.
  for (int mask = 0; mask < 64; ++mask) {
    if (__builtin_popcount(static_cast<unsigned>(mask)) != 3) continue;
    std::ostringstream text;
    text << head.str();
    std::vector<std::string> order;
    int next[2] = {0, 0};
    std::uint64_t tick = 10;
    for (int i = 0; i < 6; ++i) {
      const int thread = (mask >> i) & 1;
      const int step = next[thread]++;
      order.push_back(labels[thread][step]);
      text << "@" << tick++ << " " << op_text(thread, step) << "\n";
      if (step == 2) text << "@" << tick++ << " ASSERT committed_sum(\"bank root\", balance) == " << initial << "\n";
    }
    Runner r(parse_scenario(text.str(), "interleave"));
    r.run_all();
    const json rep = r.report();
    json sums = json::array();
    for (const auto& a : rep["assertions"]) sums.push_back(a["actual"]);
    json commits = json::array();
    for (const auto& ev : rep["events"])
      if (ev["action"] == "COMMIT" && ev["tick"].get<std::uint64_t>() >= 10)
        commits.push_back(ev.value("status", "") == "ok" ? "ok" : ev.value("error", ev.value("status", "")));
    const bool ok = r.passed();
    if (!ok) ++violations;
    ++total;
    runs.push_back(json{{"order", order}, {"committed_sums", sums}, {"commits", commits}, {"preserved", ok}});
  }
  json report{{"v", 1},          {"policy", policy},   {"seed", seed},
              {"initial_sum", initial}, {"interleavings", total}, {"violations", violations},
              {"preserved", total - violations}, {"runs", runs}};
  return Outcome{report, violations == 0 ? 0 : 1};
}

}  // namespace pstore::harness
