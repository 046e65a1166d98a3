#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

#include "pstore/directories.hpp"
#include "pstore/error.hpp"
#include "pstore/harness/fixtures.hpp"
#include "pstore/harness/report.hpp"
#include "pstore/harness/runner.hpp"
#include "pstore/keyspace.hpp"
#include "pstore/simulation.hpp"

namespace py = pybind11;
using namespace pstore;
using namespace pstore::harness;

namespace {

harness::RunOptions options(const std::optional<std::string>& durable) {
  RunOptions o;
  o.durable = durable;
  return o;
}

py::tuple result(const Outcome& out) { return py::make_tuple(out.exit_code, render_json(out.report)); }

// A bare ring of nodes with the replicated key-value layer, for poking at
// placement from Python.
class Cluster {
 public:
  Cluster(std::uint64_t seed, std::size_t replication, std::size_t nodes)
      : sim_(SimulationConfig{seed, replication, {}, DataStrategy::kCoLocated, 0}) {
    for (std::size_t i = 0; i < nodes; ++i) {
      sim_.join("n" + std::to_string(i));
      quiesce(sim_);
    }
  }

  std::string join(const std::string& name) { return sim_.join(name).hex(); }
  void fail(const std::string& name) { sim_.fail(sim_.id_of(name)); }
  py::tuple stabilize() {
    auto r = quiesce(sim_);
    return py::make_tuple(r.routing_rounds, r.repaired_copies);
  }
  std::vector<std::string> live() const {
    std::vector<std::string> out;
    for (const auto& id : sim_.overlay().live_nodes()) out.push_back(sim_.name_of(id));
    return out;
  }
  std::string responsible(const std::string& key_hex) const {
    return sim_.name_of(sim_.overlay().responsible_node(Key::from_hex(key_hex)));
  }
  void put(const std::string& key_hex, const py::bytes& value) {
    const Key k = Key::from_hex(key_hex);
    const std::string v = value;
    home(k).put(k, Data(v.begin(), v.end()));
  }
  py::bytes get(const std::string& key_hex) {
    const Key k = Key::from_hex(key_hex);
    const Data d = home(k).get(k);
    return py::bytes(reinterpret_cast<const char*>(d.data()), d.size());
  }
  std::vector<std::string> copies(const std::string& key_hex) const {
    std::vector<std::string> out;
    const auto all = sim_.copies(Aid::kNameDir);
    auto it = all.find(Key::from_hex(key_hex));
    if (it != all.end())
      for (const auto& n : it->second) out.push_back(sim_.name_of(n));
    return out;
  }
  std::size_t placement_violations() const { return sim_.check_placement().violations; }

 private:
  GenericStore& home(const Key& k) { return sim_.service(sim_.dol(sim_.first_live(), k, Aid::kNameDir)); }
  Simulation sim_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Simulated persistent-object middleware over a key-based routing overlay";

  py::exception<Error>(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object type = py::module_::import("pstore._core").attr("Error");
      py::object exc = type(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(type.ptr(), exc.ptr());
    } catch (const ParseError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def("sha1_hex", [](const py::bytes& data) { return digest(std::string(data)).hex(); },
        "SHA-1 of the bytes as 40 hex digits.");
  m.def("in_ring", [](const std::string& k, const std::string& lo, const std::string& hi) {
    return in_ring(Key::from_hex(k), Key::from_hex(lo), Key::from_hex(hi));
  }, "Whether k lies in the clockwise interval (lo, hi] of the 160-bit ring.");
  m.def("fixtures", [] {
    std::vector<std::string> out;
    for (const auto& [name, text] : builtin_fixtures()) out.push_back(name);
    return out;
  });

  m.def("run", [](const std::string& scenario, std::optional<std::string> durable) {
    return result(run_scenario(load_scenario(scenario), options(durable)));
  }, py::arg("scenario"), py::arg("durable") = py::none());
  m.def("run_text", [](const std::string& text, const std::string& name, std::optional<std::string> durable) {
    return result(run_scenario(parse_scenario(text, name), options(durable)));
  }, py::arg("text"), py::arg("name") = "", py::arg("durable") = py::none());
  m.def("sweep", [](const std::string& scenario, std::size_t commit, std::optional<std::string> durable) {
    return result(sweep_crash_points(load_scenario(scenario), commit, options(durable)));
  }, py::arg("scenario"), py::arg("commit"), py::arg("durable") = py::none());
  m.def("restart", [](const std::string& scenario, std::uint64_t split, std::optional<std::string> durable) {
    return result(restart_all(load_scenario(scenario), split, options(durable)));
  }, py::arg("scenario"), py::arg("split"), py::arg("durable") = py::none());
  m.def("interleave", [](const std::string& policy, std::uint64_t seed) {
    return result(enumerate_interleavings(policy, seed));
  }, py::arg("policy") = "optimistic", py::arg("seed") = 42);

  py::class_<Cluster>(m, "Cluster")
      .def(py::init<std::uint64_t, std::size_t, std::size_t>(), py::arg("seed") = 42, py::arg("replication") = 3,
           py::arg("nodes") = 0)
      .def("join", &Cluster::join)
      .def("fail", &Cluster::fail)
      .def("stabilize", &Cluster::stabilize)
      .def("live", &Cluster::live)
      .def("responsible", &Cluster::responsible)
      .def("put", &Cluster::put)
      .def("get", &Cluster::get)
      .def("copies", &Cluster::copies)
      .def("placement_violations", &Cluster::placement_violations);
}
