#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include "oracles.hpp"
#include "pstore/harness/fixtures.hpp"
#include "pstore/harness/report.hpp"
#include "pstore/harness/runner.hpp"
#include "pstore/harness/scenario.hpp"

using namespace pstore;
using namespace pstore::harness;

namespace {

std::size_t parse_error_line(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

const char* kMinimal =
    "seed=3\n"
    "nodes=3\n"
    "class Counter value:INT\n"
    "@1 CREATE x Counter value=5\n"
    "@2 ASSOCIATE \"c\" x\n"
    "@3 COMMIT \"c\"\n"
    "@4 ASSERT x.value == 5\n";

}  // namespace

TEST(Tokenize, QuotesGroupAndEscape) {
  auto t = tokenize(R"(ASSOCIATE "bank root" bank label="a \"b\"")", 1);
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(t[1], "\"bank root\"");
  EXPECT_TRUE(is_quoted(t[1]));
  EXPECT_EQ(unquote(t[1]), "bank root");
  EXPECT_EQ(unquote(t[3]), t[3]);
  EXPECT_EQ(unquote(R"("a \"b\"")"), R"(a "b")");
  EXPECT_THROW(tokenize("\"open", 4), ParseError);
}

TEST(ParseScenario, HeaderSchemaAndEvents) {
  Scenario sc = parse_scenario(
      "# comment\n"
      "seed=9\nnodes=4\nreplication=2\ndurability=mem\n"
      "datastore=location-recording\nrepositories=3\n"
      "class Account id:STRING balance:INT\n"
      "policy optimistic scope=object:\"bank root\" params replicas=2\n"
      "@1 CREATE A Account id=\"A\" balance=100 on=n1\n",
      "t");
  EXPECT_EQ(sc.seed, 9u);
  EXPECT_EQ(sc.nodes, 4u);
  EXPECT_EQ(sc.replication, 2u);
  EXPECT_EQ(sc.data_strategy, DataStrategy::kLocationRecording);
  EXPECT_EQ(sc.repositories, 3u);
  ASSERT_EQ(sc.classes.size(), 1u);
  EXPECT_EQ(sc.classes[0].fields[1], (FieldSpec{"balance", FieldKind::kInt}));
  ASSERT_EQ(sc.policies.size(), 1u);
  EXPECT_EQ(sc.policies[0].scope, PolicyScope::Kind::kObject);
  EXPECT_EQ(sc.policies[0].target, "bank root");
  EXPECT_EQ(sc.policies[0].params.at("replicas"), "2");
  ASSERT_EQ(sc.events.size(), 1u);
  EXPECT_EQ(sc.events[0].opt("on"), "n1");
  EXPECT_EQ(sc.events[0].line, 10u);
}

TEST(ParseScenario, ErrorsCarryLineNumbers) {
  EXPECT_EQ(parse_error_line("seed=1\nnodes=0\n"), 2u);
  EXPECT_EQ(parse_error_line("seed=1\nbogus line here\n"), 2u);
  EXPECT_EQ(parse_error_line("class A x:FLOAT\n"), 1u);
  EXPECT_EQ(parse_error_line("class A x:INT x:INT\n"), 1u);
  EXPECT_EQ(parse_error_line("class A x:INT\n@2 CREATE a A\n@2 CREATE b A\n"), 3u);
  EXPECT_EQ(parse_error_line("class A x:INT\n\n@1 JUMP a\n"), 3u);
  EXPECT_EQ(parse_error_line("@1 CREATE a Missing\n"), 1u);
  EXPECT_EQ(parse_error_line("class A x:INT\n@1 ASSERT a.x\n"), 2u);
  EXPECT_EQ(parse_error_line("durability=tape\n"), 1u);
  EXPECT_EQ(parse_error_line("datastore=location-recording\n"), 1u);
  EXPECT_EQ(parse_error_line("policy none scope=planet:x\n"), 1u);
  EXPECT_EQ(parse_error_line(kMinimal), 0u);
}

TEST(Fixtures, AllBuiltinsPass) {
  for (const auto& [name, text] : builtin_fixtures()) {
    Outcome out = run_scenario(parse_scenario(text, name));
    EXPECT_EQ(out.exit_code, 0) << name << "\n" << render_text(out.report);
    EXPECT_TRUE(out.report["passed"].get<bool>()) << name;
  }
}

TEST(Fixtures, CheckedInFilesMatchBuiltins) {
  for (const auto& [name, text] : builtin_fixtures()) {
    std::ifstream in(std::string(PSTORE_SCENARIO_DIR) + "/" + name + ".pst");
    std::string file((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EXPECT_EQ(file, text) << name;
  }
}

TEST(Runner, FailedAssertGivesExitOne) {
  std::string text = kMinimal;
  text += "@5 ASSERT x.value == 6\n";
  Outcome out = run_scenario(parse_scenario(text));
  EXPECT_EQ(out.exit_code, 1);
  EXPECT_EQ(out.report["summary"]["failed"], 1);
}

TEST(Runner, ErrorsAreReportedByCode) {
  std::string text = kMinimal;
  text += "@5 FAIL n0\n@6 FAIL n1\n@7 FAIL n2\n@8 ASSERT error(x.value) == UNRESOLVABLE\n";
  Outcome out = run_scenario(parse_scenario(text));
  const auto& ev = out.report["events"][6];
  EXPECT_EQ(ev["status"], "error");
  EXPECT_EQ(ev["error"], "LAST_NODE");
}

TEST(Runner, ReportIsDeterministic) {
  for (const auto& [name, text] : builtin_fixtures()) {
    const std::string a = render_json(run_scenario(parse_scenario(text, name)).report);
    const std::string b = render_json(run_scenario(parse_scenario(text, name)).report);
    EXPECT_EQ(a, b) << name;
  }
}

TEST(Runner, ReportShape) {
  Outcome out = run_scenario(parse_scenario(kMinimal, "minimal"));
  const auto& r = out.report;
  for (const char* k : {"v", "scenario", "seed", "config", "events", "assertions", "summary", "census", "routing", "passed"})
    EXPECT_TRUE(r.contains(k)) << k;
  EXPECT_EQ(r["v"], 1);
  EXPECT_EQ(r["events"].size(), 4u);
  EXPECT_EQ(r["scenario"], "minimal");
}

TEST(Sweep, EveryCrashPointIsOldOrNew) {
  const Scenario sc = load_scenario("bank-default");
  for (std::size_t commit = 0; commit < 2; ++commit) {
    Outcome out = sweep_crash_points(sc, commit);
    EXPECT_EQ(out.report["mixed"], 0);
    EXPECT_EQ(out.report["steps"], 11);
    ASSERT_EQ(out.report["runs"].size(), 12u);
    for (const auto& run : out.report["runs"]) {
      const std::string o = run["outcome"];
      EXPECT_TRUE(o == "OLD" || o == "NEW") << run.dump();
    }
    EXPECT_EQ(out.report["runs"].back()["outcome"], "NEW");
  }
}

TEST(Restart, CommittedClosureSurvives) {
  oracle::TempDir dir("restart");
  Outcome out = restart_all(load_scenario("restart-persistence"), 8, RunOptions{"dir:" + dir.path().string()});
  EXPECT_EQ(out.exit_code, 0) << render_text(out.report);
  EXPECT_TRUE(out.report["recovered"].get<bool>());
}

TEST(Interleave, OptimisticPreservesEveryOrdering) {
  Outcome opt = enumerate_interleavings("optimistic");
  EXPECT_EQ(opt.report["interleavings"], 20);
  EXPECT_EQ(opt.report["violations"], 0);
  Outcome def = enumerate_interleavings("default");
  EXPECT_EQ(def.report["interleavings"], 20);
  EXPECT_GT(def.report["violations"].get<int>(), 0);
}

#ifdef PSTORE_CLI
namespace {

int cli(const std::string& args) {
  const std::string cmd = std::string(PSTORE_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, ExitCodes) {
  oracle::TempDir dir("cli");
  const auto bad = dir.path() / "bad.pst";
  std::ofstream(bad) << "seed=1\nnodes=2\nclass A x:INT\n@1 CREATE a A\n@1 CREATE b A\n";
  EXPECT_EQ(cli("run " + bad.string()), 2);
  EXPECT_EQ(cli("run " + (dir.path() / "missing.pst").string()), 2);
  EXPECT_EQ(cli("run failover-basic"), 0);
  const auto failing = dir.path() / "fail.pst";
  std::ofstream(failing) << kMinimal << "@5 ASSERT x.value == 1\n";
  EXPECT_EQ(cli("run " + failing.string()), 1);
  EXPECT_EQ(cli("fixtures"), 0);
}

TEST(Cli, ParseErrorNamesLine) {
  oracle::TempDir dir("cli-msg");
  const auto bad = dir.path() / "bad.pst";
  const auto err = dir.path() / "err.txt";
  std::ofstream(bad) << "seed=1\nnodes=2\n\nclass A x:BOGUS\n";
  [[maybe_unused]] int rc = std::system((std::string(PSTORE_CLI) + " run " + bad.string() + " 2>" + err.string() + " >/dev/null").c_str());
  std::ifstream in(err);
  std::string msg((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
}
#endif
