#include <sstream>

#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "irgld/branching.hpp"
#include "irgld/cli.hpp"
#include "irgld/experiments.hpp"
#include "irgld/graph.hpp"
#include "irgld/ldp.hpp"
#include "irgld/model.hpp"

namespace py = pybind11;
using namespace irgld;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of irgld";

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<double, double, double, double>(), py::arg("alpha"), py::arg("sigma") = 1.0,
           py::arg("q") = 1.0, py::arg("w_min") = 1.0)
      .def_property_readonly("alpha", &ModelParams::alpha)
      .def_property_readonly("sigma", &ModelParams::sigma)
      .def_property_readonly("q", &ModelParams::q)
      .def_property_readonly("w_min", &ModelParams::w_min)
      .def("with_q", &ModelParams::with_q)
      .def(py::self == py::self)
      .def("__repr__", [](const ModelParams& p) {
        std::ostringstream os;
        os << "ModelParams(alpha=" << p.alpha() << ", sigma=" << p.sigma() << ", q=" << p.q()
           << ", w_min=" << p.w_min() << ")";
        return os.str();
      });

  py::class_<Graph>(m, "Graph")
      .def_readonly("params", &Graph::params)
      .def_readonly("n_model", &Graph::n_model)
      .def_readonly("weights", &Graph::weights)
      .def_readonly("seed", &Graph::seed)
      .def_property_readonly("edges",
                             [](const Graph& g) {
                               std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
                               out.reserve(g.edges.size());
                               for (const auto& e : g.edges) out.emplace_back(e.u, e.v);
                               return out;
                             })
      .def_property_readonly("vertex_count", &Graph::vertex_count);

  m.def(
      "generate",
      [](const ModelParams& p, std::size_t n, std::uint64_t seed, const std::string& path, unsigned threads) {
        GenerateOptions o;
        o.path = parse_generator_path(path);
        o.threads = threads;
        return generate(p, n, seed, o);
      },
      py::arg("params"), py::arg("n"), py::arg("seed"), py::arg("path") = "pairwise", py::arg("threads") = 1);

  py::class_<ComponentStats>(m, "ComponentStats")
      .def_readonly("component_id", &ComponentStats::component_id)
      .def_readonly("sizes", &ComponentStats::sizes)
      .def_readonly("largest_size", &ComponentStats::largest_size)
      .def_readonly("count_by_size", &ComponentStats::count_by_size)
      .def("vertices_in_size", &ComponentStats::vertices_in_size);
  m.def("components", &components, py::arg("graph"));

  py::class_<TreePool>(m, "TreePool")
      .def_property_readonly("params", &TreePool::params)
      .def_property_readonly("size_cap", &TreePool::size_cap)
      .def_property_readonly("seed", &TreePool::seed)
      .def_property_readonly("censored_count", &TreePool::censored_count)
      .def("__len__", &TreePool::count)
      .def("size", &TreePool::size)
      .def("censored", &TreePool::censored)
      .def("weights", [](const TreePool& p, std::size_t i) {
        const auto w = p.weights(i);
        return std::vector<double>(w.begin(), w.end());
      })
      .def(py::self == py::self);

  m.def(
      "build_pool",
      [](const ModelParams& p, std::size_t M, std::uint32_t cap, std::uint64_t seed, std::uint32_t store_cap,
         unsigned threads) {
        py::gil_scoped_release release;
        return build_pool(p, M, cap, seed, {store_cap, threads});
      },
      py::arg("params"), py::arg("M"), py::arg("size_cap"), py::arg("seed"), py::arg("weight_store_cap") = 0,
      py::arg("threads") = 1);
  m.def("save_pool", &save_pool, py::arg("pool"), py::arg("path"));
  m.def("load_pool", &load_pool, py::arg("path"));

  py::class_<Interval>(m, "Interval").def_readonly("lo", &Interval::lo).def_readonly("hi", &Interval::hi);

  py::class_<ThetaEstimate>(m, "ThetaEstimate")
      .def_readonly("theta", &ThetaEstimate::theta)
      .def_readonly("ci", &ThetaEstimate::ci)
      .def_readonly("se", &ThetaEstimate::se)
      .def_readonly("cap_bracket", &ThetaEstimate::cap_bracket);
  m.def("estimate_theta", &estimate_theta, py::arg("pool"));
  m.def("theta_rank_one_oracle", &theta_rank_one_oracle, py::arg("params"));

  py::class_<HubsResult>(m, "HubsResult")
      .def_readonly("value", &HubsResult::value)
      .def_readonly("ceil", &HubsResult::ceil)
      .def_property_readonly("status", [](const HubsResult& h) { return std::string(to_string(h.status)); })
      .def_readonly("theta", &HubsResult::theta);
  m.def("hubs", py::overload_cast<double, const TreePool&>(&hubs), py::arg("rho"), py::arg("pool"));
  m.def("hubs_via_inverse", &hubs_via_inverse, py::arg("rho"), py::arg("pool"));
  m.def("hubs_asymptotic", &hubs_asymptotic, py::arg("rho"), py::arg("q"));
  m.def("rate_function", &rate_function, py::arg("rho"), py::arg("pool"));

  py::class_<CEstimate>(m, "CEstimate")
      .def_readonly("C", &CEstimate::C)
      .def_readonly("ci", &CEstimate::ci)
      .def_readonly("accepted", &CEstimate::accepted)
      .def_readonly("draws", &CEstimate::draws)
      .def_readonly("phi", &CEstimate::phi)
      .def_readonly("h", &CEstimate::h);

  py::class_<LdpQuantities>(m, "LdpQuantities")
      .def_readonly("rho", &LdpQuantities::rho)
      .def_readonly("hubs_value", &LdpQuantities::hubs_value)
      .def_readonly("hubs_ceil", &LdpQuantities::hubs_ceil)
      .def_property_readonly("status", [](const LdpQuantities& l) { return std::string(to_string(l.status)); })
      .def_readonly("theta_hat", &LdpQuantities::theta_hat)
      .def_readonly("rate", &LdpQuantities::rate)
      .def_readonly("C", &LdpQuantities::C)
      .def_readonly("C_ci", &LdpQuantities::C_ci)
      .def_readonly("phi", &LdpQuantities::phi)
      .def_readonly("phi_found", &LdpQuantities::phi_found);
  m.def(
      "compute_ldp",
      [](double rho, const TreePool& pool, std::size_t draws, std::uint64_t seed, unsigned threads) {
        py::gil_scoped_release release;
        return compute_ldp(rho, pool, {draws, seed, threads, 0.0});
      },
      py::arg("rho"), py::arg("pool"), py::arg("draws") = 100000, py::arg("seed") = 1, py::arg("threads") = 1);

  m.def(
      "exact_small_oracle",
      [](const std::vector<double>& w, const ModelParams& p, std::size_t n_model) {
        return exact_small_oracle(w, p, n_model == 0 ? w.size() : n_model);
      },
      py::arg("weights"), py::arg("params"), py::arg("n_model") = 0);

  m.def(
      "dispatch",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = dispatch(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs one CLI invocation; returns (exit code, stdout, stderr).");
}
