#include "pstore/harness/report.hpp"

#include <sstream>

namespace pstore::harness {

using nlohmann::json;

std::string render_json(const json& report) { return report.dump(2) + "\n"; }

namespace {

std::string scalar(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

void run_text(std::ostringstream& out, const json& r) {
  out << "scenario " << scalar(r["scenario"]) << " (seed " << r["seed"] << ")\n";
  for (const auto& ev : r["events"]) {
    out << "  " << scalar(ev["text"]) << "  -> " << scalar(ev["status"]);
    for (const char* key : {"error", "value", "actual", "root_pid", "after_step"})
      if (ev.contains(key)) out << " " << key << "=" << scalar(ev[key]);
    out << "\n";
  }
  const auto& s = r["summary"];
  out << "asserts: " << s["passed"] << "/" << s["asserts"] << " passed\n";
  const auto& c = r["census"];
  out << "census: " << c["live_nodes"].size() << " live nodes, " << c["manifests"] << " manifests, "
      << c["version_logs"]["entries"] << " version entries, " << c["placement_violations"]
      << " placement violations\n";
  for (const auto& [aid, svc] : c["services"].items())
    out << "  " << aid << ": " << svc["keys"] << " keys, copies " << svc["min_copies"] << ".." << svc["max_copies"]
        << "\n";
  const auto& h = r["routing"];
  out << "routing: " << h["lookups"] << " lookups, mean " << h["mean_hops"] << " hops, max " << h["max_hops"] << "\n";
  if (r.contains("recovered")) out << "recovered: " << (r["recovered"].get<bool>() ? "yes" : "no") << "\n";
  out << (r["passed"].get<bool>() ? "PASS" : "FAIL") << "\n";
}

}  // namespace

std::string render_text(const json& r) {
  std::ostringstream out;
  if (r.contains("runs") && r.contains("mixed")) {
    out << "sweep " << scalar(r["scenario"]) << " commit #" << r["commit_index"] << ": " << scalar(r["commit"]) << "\n";
    for (const auto& run : r["runs"]) out << "  crash after step " << run["crash_after_step"] << ": " << scalar(run["outcome"]) << "\n";
    out << "mixed outcomes: " << r["mixed"] << "\n";
  } else if (r.contains("interleavings")) {
    out << "policy " << scalar(r["policy"]) << ": " << r["preserved"] << "/" << r["interleavings"]
        << " interleavings preserve the balance sum\n";
    for (const auto& run : r["runs"]) {
      out << "  ";
      for (const auto& step : run["order"]) out << scalar(step) << " ";
      out << "-> sums";
      for (const auto& s : run["committed_sums"]) out << " " << scalar(s);
      out << (run["preserved"].get<bool>() ? "" : "  VIOLATED") << "\n";
    }
  } else {
    run_text(out, r);
  }
  return out.str();
}

}  // namespace pstore::harness
