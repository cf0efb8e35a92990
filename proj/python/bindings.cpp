// Python bindings for the main operations: scenario loading, synthetic
// instances, feeding-time minimization, hits maximization, and the
// reference schemes.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "satcache/baselines.hpp"
#include "satcache/feedtime.hpp"
#include "satcache/hits.hpp"
#include "satcache/ingest.hpp"
#include "satcache/linkbudget.hpp"
#include "satcache/model.hpp"
#include "satcache/report.hpp"
#include "satcache/scenario_io.hpp"
#include "satcache/synth.hpp"

namespace py = pybind11;
using namespace satcache;

namespace {

struct Instance {
  NetworkScenario scenario;
  ContentCatalog catalog;
  DemandMatrix demand;
};

Instance from_scenario_file(const std::string& path) {
  auto loaded = load_scenario_file(path, EfficiencyMap::shannon());
  Instance inst{loaded.scenario, loaded.catalog, {}};
  if (loaded.demand) {
    inst.demand = *loaded.demand;
  } else if (!loaded.demand_csv.empty()) {
    std::ifstream in(loaded.demand_csv);
    if (!in) {
      throw Error(Errc::UnreadableSource,
                  "cannot open demand file " + loaded.demand_csv);
    }
    inst.demand = read_demand_csv(in, inst.scenario, inst.catalog);
  } else {
    throw Error(Errc::InvalidArgument, "scenario carries no demand");
  }
  require_valid(inst.scenario, inst.catalog, inst.demand);
  return inst;
}

Instance synthetic(int num_cdns, int num_items, uint64_t seed, double cache_gb,
                   double total_bandwidth_hz, double locality, int num_colors,
                   double requests_per_cdn) {
  SynthSpec spec;
  spec.num_cdns = num_cdns;
  spec.num_items = num_items;
  spec.seed = seed;
  spec.cache_gb = cache_gb;
  spec.total_bandwidth_hz = total_bandwidth_hz;
  spec.locality = locality;
  spec.num_colors = num_colors;
  spec.requests_per_cdn = requests_per_cdn;
  auto inst = make_synthetic_instance(spec);
  return {inst.scenario, inst.catalog, inst.demand};
}

py::dict solution_summary(const JointSolution& sol, const Instance& inst) {
  py::dict out;
  auto loads = sol.beam_loads_bits(inst.catalog);
  double spot_bits = 0.0;
  for (size_t k = 1; k < loads.size(); ++k) spot_bits += loads[k];
  out["tau_s"] = sol.feeding_time_s;
  out["hits"] = sol.hits(inst.demand);
  out["chr"] = sol.hits(inst.demand) / std::max(inst.demand.total(), 1e-300);
  out["wide_bits"] = loads[0];
  out["spot_bits"] = spot_bits;
  out["bandwidth_hz"] = sol.bandwidth_hz;
  out["feasible"] =
      check_feasible(sol, inst.scenario, inst.catalog, inst.demand).feasible;
  return out;
}

py::dict run_feedtime(Instance& inst, double target_chr, double eps,
                      int max_iters) {
  if (target_chr >= 0.0) {
    for (int n = 0; n < inst.scenario.num_cdns(); ++n) {
      inst.scenario.hit_targets[n] = target_chr * inst.demand.cdn_total(n);
    }
  }
  ScaConfig config;
  config.convergence_eps = eps;
  config.max_iters = max_iters;
  auto result =
      minimize_feeding_time(inst.scenario, inst.catalog, inst.demand, config);
  py::dict out = solution_summary(result.solution, inst);
  out["converged"] = result.trace.converged;
  out["iterations"] = result.trace.iterations.size();
  py::list trace;
  for (const auto& it : result.trace.iterations) trace.append(it.tau_s);
  out["tau_trace"] = trace;
  return out;
}

py::dict run_hits(const Instance& inst, double tau_s,
                  const std::string& method) {
  MbipConfig config;
  config.fixed_tau_s = tau_s;
  if (method == "bnb") {
    config.method = HitsMethod::BranchAndBound;
  } else if (method == "relax") {
    config.method = HitsMethod::RelaxRoundRepair;
  } else {
    throw Error(Errc::InvalidArgument, "method must be bnb or relax");
  }
  auto result = maximize_hits(inst.scenario, inst.catalog, inst.demand, config);
  py::dict out = solution_summary(result.solution, inst);
  out["hits"] = result.hits;
  out["chr"] = result.chr;
  out["gap"] = result.gap;
  out["status"] = solve_status_name(result.status);
  out["nodes"] = result.nodes_explored;
  return out;
}

py::dict run_reference(const Instance& inst, const std::string& which,
                       const std::string& objective, double tau_s) {
  const bool time_objective = objective == "time";
  JointSolution sol;
  if (which == "ref1") {
    sol = reference1_multibeam(inst.scenario, inst.catalog, inst.demand,
                               time_objective
                                   ? BaselineObjective::MinimizeTimeToTargets
                                   : BaselineObjective::MaximizeHitsAtTau,
                               tau_s);
  } else if (which == "ref2") {
    sol = reference2_widebeam(inst.scenario, inst.catalog, inst.demand,
                              time_objective
                                  ? BaselineObjective::MinimizeTimeToTargets
                                  : BaselineObjective::MaximizeHitsAtTau,
                              tau_s);
  } else if (which == "ref3") {
    if (time_objective) {
      throw Error(Errc::InvalidArgument,
                  "ref3 has no feeding-time-minimization form");
    }
    sol = reference3_hybrid(inst.scenario, inst.catalog, inst.demand, tau_s)
              .best;
  } else {
    throw Error(Errc::InvalidArgument, "which must be ref1, ref2, or ref3");
  }
  return solution_summary(sol, inst);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "joint bandwidth allocation and edge caching for flexible "
            "multibeam satellites";

  py::register_exception<Error>(m, "SatcacheError");

  py::class_<Instance>(m, "Instance")
      .def_static("from_scenario_file", &from_scenario_file, py::arg("path"))
      .def_static("synthetic", &synthetic, py::arg("num_cdns") = 9,
                  py::arg("num_items") = 100, py::arg("seed") = 1,
                  py::arg("cache_gb") = 30.0,
                  py::arg("total_bandwidth_hz") = 5e8,
                  py::arg("locality") = 0.5, py::arg("num_colors") = 0,
                  py::arg("requests_per_cdn") = 12000.0)
      .def_property_readonly(
          "num_cdns", [](const Instance& i) { return i.scenario.num_cdns(); })
      .def_property_readonly(
          "num_items", [](const Instance& i) { return i.catalog.size(); })
      .def_property_readonly(
          "total_requests", [](const Instance& i) { return i.demand.total(); })
      .def_property_readonly("total_bandwidth_hz",
                             [](const Instance& i) {
                               return i.scenario.total_bandwidth_hz;
                             })
      .def("set_hit_targets",
           [](Instance& i, double chr) {
             for (int n = 0; n < i.scenario.num_cdns(); ++n) {
               i.scenario.hit_targets[n] = chr * i.demand.cdn_total(n);
             }
           },
           py::arg("target_chr"))
      .def("set_cache_gb",
           [](Instance& i, double gb) {
             for (auto& m_n : i.scenario.cache_size_bits) m_n = gb * 8e9;
           },
           py::arg("cache_gb"))
      .def("validate", [](const Instance& i) {
        auto report = validate_scenario(i.scenario, i.catalog, i.demand);
        std::vector<std::string> issues;
        for (const auto& issue : report.issues) {
          issues.push_back(std::string(errc_name(issue.code)) + ": " +
                           issue.detail);
        }
        return issues;
      });

  m.def("shannon_efficiency", &shannon_efficiency, py::arg("snr_db"),
        "spectral efficiency log2(1 + 10^(snr/10)) in bits/s/Hz");
  m.def("minimize_feeding_time", &run_feedtime, py::arg("instance"),
        py::arg("target_chr") = -1.0, py::arg("eps") = 1e-4,
        py::arg("max_iters") = 50,
        "joint bandwidth + caching feeding-time minimization");
  m.def("maximize_hits", &run_hits, py::arg("instance"), py::arg("tau_s"),
        py::arg("method") = "relax",
        "joint cache-hits maximization at a fixed feeding time");
  m.def("reference", &run_reference, py::arg("instance"), py::arg("which"),
        py::arg("objective") = "hits", py::arg("tau_s") = 0.0,
        "reference schemes: ref1 multibeam, ref2 widebeam, ref3 hybrid");
}
