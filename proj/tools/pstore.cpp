// pstore: run, sweep and restart scenario files against the simulated overlay.
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pstore/error.hpp"
#include "pstore/harness/fixtures.hpp"
#include "pstore/harness/report.hpp"
#include "pstore/harness/runner.hpp"

using namespace pstore::harness;

namespace {

int emit(const Outcome& out, const std::string& format) {
  std::cout << (format == "text" ? render_text(out.report) : render_json(out.report));
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic persistent-object middleware simulator"};
  app.require_subcommand(1);

  std::string file;
  std::string format = "json";
  std::string durable;
  std::size_t commit_index = 0;
  std::uint64_t split = 0;
  std::string policy = "optimistic";
  std::uint64_t seed = 42;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("file", file, "scenario file or built-in fixture name")->required();
    cmd->add_option("--report", format, "report format")->check(CLI::IsMember({"json", "text"}));
    cmd->add_option("--durable", durable, "durable stores: mem or dir:<path>");
  };

  auto* run = app.add_subcommand("run", "run a scenario");
  add_common(run);
  auto* sweep = app.add_subcommand("sweep", "crash the committing node after every step of one commit");
  add_common(sweep);
  sweep->add_option("--commit", commit_index, "0-based index among the scenario's COMMIT events")->required();
  auto* restart = app.add_subcommand("restart", "restart every node at a tick over durable state");
  add_common(restart);
  restart->add_option("--split", split, "tick at which to restart")->required();
  auto* interleave = app.add_subcommand("interleave", "enumerate the two-transfer bank interleavings");
  interleave->add_option("--policy", policy, "policy on the bank root")
      ->check(CLI::IsMember({"default", "optimistic", "none", "volatile"}));
  interleave->add_option("--seed", seed, "scenario seed");
  interleave->add_option("--report", format, "report format")->check(CLI::IsMember({"json", "text"}));
  app.add_subcommand("fixtures", "list built-in scenarios");

  CLI11_PARSE(app, argc, argv);

  RunOptions options;
  if (!durable.empty()) {
    if (durable != "mem" && durable.rfind("dir:", 0) != 0) {
      std::cerr << "pstore: --durable must be mem or dir:<path>\n";
      return 2;
    }
    options.durable = durable;
  }

  try {
    if (app.got_subcommand("fixtures")) {
      for (const auto& [name, text] : builtin_fixtures()) std::cout << name << "\n";
      return 0;
    }
    if (app.got_subcommand("interleave")) return emit(enumerate_interleavings(policy, seed), format);
    const Scenario scenario = load_scenario(file);
    if (app.got_subcommand("run")) return emit(run_scenario(scenario, options), format);
    if (app.got_subcommand("sweep")) return emit(sweep_crash_points(scenario, commit_index, options), format);
    return emit(restart_all(scenario, split, options), format);
  } catch (const ParseError& e) {
    std::cerr << "pstore: " << file << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "pstore: " << e.what() << "\n";
    return 2;
  }
}
