#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pstore/harness/scenario.hpp"
#include "pstore/middleware.hpp"
#include "pstore/policy.hpp"
#include "pstore/simulation.hpp"

namespace pstore::harness {

using nlohmann::json;

struct RunOptions {
  // Overrides the scenario's durability setting ("mem" or "dir:<path>").
  std::optional<std::string> durable;
};

// Executes a scenario's schedule on a fresh simulation.
class Runner {
 public:
  explicit Runner(Scenario scenario, RunOptions options = {});
  ~Runner();

  const Scenario& scenario() const { return scenario_; }
  Simulation& sim() { return *sim_; }
  const PolicyRegistry& policies() const { return policies_; }
  Middleware middleware(const NodeId& node) { return Middleware(*sim_, policies_, node); }
  NodeId node_named(const std::string& name) const;
  /// A live node to evaluate reads from: the preferred one if up.
  NodeId reader(const std::optional<NodeId>& preferred = {}) const;

  /// Runs one event and records its outcome; crash_after_step overrides the
  /// event's own option for COMMIT events.
  void run_event(const Event& ev, std::optional<std::size_t> crash_after_step = {});
  /// Runs events [begin, end) of the schedule.
  void run_range(std::size_t begin, std::size_t end);
  void run_all() { run_range(0, scenario_.events.size()); }

  bool passed() const { return failed_asserts_ == 0; }
  /// Root names associated so far, in association order.
  const std::vector<std::string>& associated_names() const { return names_; }
  const json& last_commit() const { return last_commit_; }

  json report() const;
  json census() const;

 private:
  struct Binding {
    NodeId node;                        // node the alias was obtained on
    std::optional<std::uint64_t> local_id;  // objects created here
    std::uint64_t incarnation = 0;
    std::optional<AbstractRef> ref;     // references from GET, or after GUID allocation
  };
  struct Path;

  void apply_policies_for(const std::string& root_name, const Guid& guid);
  Path resolve_path(const std::string& path, const std::optional<NodeId>& on);
  FieldValue read_path(const std::string& path, const std::optional<NodeId>& on);
  void write_path(const std::string& path, FieldValue value, const std::optional<TxnId>& txn,
                  const std::optional<NodeId>& on);
  FieldValue parse_value(const std::string& token, const std::optional<NodeId>& on);
  Guid guid_of_alias(const std::string& alias);
  json evaluate_assert(const Event& ev);
  json execute(const Event& ev, std::optional<std::size_t> crash_after_step);
  std::optional<NodeId> on_node(const Event& ev) const;

  Scenario scenario_;
  RunOptions options_;
  PolicyRegistry policies_;
  std::unique_ptr<Simulation> sim_;
  std::map<std::string, Binding> aliases_;
  std::vector<std::string> names_;
  json events_ = json::array();
  json asserts_ = json::array();
  json last_commit_;
  std::size_t failed_asserts_ = 0;
};

/// `run` as a report: exit code 0 when every ASSERT held.
struct Outcome {
  json report;
  int exit_code = 0;
};

Outcome run_scenario(const Scenario& scenario, const RunOptions& options = {});
/// Re-runs the scenario once per commit step of its commit_index-th COMMIT
/// (0-based), crashing the committing node after that step, and classifies
/// the closure read afterwards as OLD, NEW or MIXED.
Outcome sweep_crash_points(const Scenario& scenario, std::size_t commit_index, const RunOptions& options = {});
/// Runs events before `split_tick`, restarts every node over its durable
/// state, runs the rest and checks each named closure against its manifest.
Outcome restart_all(const Scenario& scenario, std::uint64_t split_tick, const RunOptions& options = {});
/// Enumerates every interleaving of two bank transfers (debit, credit,
/// commit per thread) under the given root policy and checks the committed
/// balance sum after every commit.
Outcome enumerate_interleavings(const std::string& policy, std::uint64_t seed = 42);

}  // namespace pstore::harness
