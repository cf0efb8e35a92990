#include "satcache/report.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "satcache/baselines.hpp"

namespace satcache {

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

struct PointResult {
  std::vector<ReportRow> rows;
  std::vector<JointSolution> solutions;
  std::vector<ScaTrace> traces;
  std::string error;  // first failure inside the worker, if any
};

void fill_split(ReportRow& row, const JointSolution& sol,
                const ContentCatalog& catalog) {
  auto loads = sol.beam_loads_bits(catalog);
  row.wide_bits = loads[0];
  row.spot_bits = std::accumulate(loads.begin() + 1, loads.end(), 0.0);
}

}  // namespace

const char* sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::TargetChr: return "chr";
    case SweepAxis::CacheSize: return "cache_gb";
    case SweepAxis::FeedingTime: return "feeding_time_s";
  }
  return "unknown";
}

SweepOutcome run_sweep(const NetworkScenario& scenario,
                       const ContentCatalog& catalog,
                       const DemandMatrix& demand, const SweepSpec& spec) {
  require_valid(scenario, catalog, demand);
  if (spec.values.empty()) {
    throw Error(Errc::InvalidArgument, "sweep needs at least one axis value");
  }
  for (size_t i = 1; i < spec.values.size(); ++i) {
    if (!(spec.values[i] > spec.values[i - 1])) {
      throw Error(Errc::InvalidArgument,
                  "sweep values must be strictly increasing");
    }
  }
  if (spec.schemes.empty()) {
    throw Error(Errc::InvalidArgument, "sweep needs at least one scheme");
  }
  for (const auto& scheme : spec.schemes) {
    if (scheme != "joint" && scheme != "ref1" && scheme != "ref2" &&
        scheme != "ref3") {
      throw Error(Errc::InvalidArgument, "unknown scheme '" + scheme + "'");
    }
    if (scheme == "ref3" && spec.axis == SweepAxis::TargetChr) {
      throw Error(Errc::InvalidArgument,
                  "ref3 has no feeding-time-minimization form");
    }
  }
  if (spec.compare_reuse) {
    for (const auto& beam : scenario.spot_beams) {
      if (!beam.color) {
        throw Error(Errc::MissingColor,
                    "reuse comparison needs a color on every spot beam");
      }
    }
  }

  const double total_requests = std::max(demand.total(), 1e-300);

  auto scenario_at = [&](double value) {
    NetworkScenario sc = scenario;
    switch (spec.axis) {
      case SweepAxis::TargetChr:
        for (int n = 0; n < sc.num_cdns(); ++n) {
          sc.hit_targets[n] = value * demand.cdn_total(n);
        }
        break;
      case SweepAxis::CacheSize:
        for (auto& cache : sc.cache_size_bits) cache = value * 8e9;
        break;
      case SweepAxis::FeedingTime:
        break;  // the value is the feeding window itself
    }
    return sc;
  };

  auto tau_at = [&](double value) {
    return spec.axis == SweepAxis::FeedingTime ? value : spec.fixed_tau_s;
  };

  auto run_joint = [&](const NetworkScenario& sc, double value,
                       const std::string& label, PointResult& out,
                       const JointSolution* floor_solution = nullptr) {
    ReportRow row;
    row.axis_value = value;
    row.scheme = label;
    if (spec.axis == SweepAxis::TargetChr) {
      auto result = minimize_feeding_time(sc, catalog, demand, spec.sca);
      row.tau_s = result.solution.feeding_time_s;
      row.hits = result.solution.hits(demand);
      row.chr = row.hits / total_requests;
      row.solver_status = result.solution.diagnostics.solver_status;
      fill_split(row, result.solution, catalog);
      out.solutions.push_back(std::move(result.solution));
      out.traces.push_back(std::move(result.trace));
    } else {
      MbipConfig config;
      config.fixed_tau_s = tau_at(value);
      config.method = spec.method;
      config.solver = spec.solver;
      auto result = maximize_hits(sc, catalog, demand, config);
      // A plan for a more constrained spectrum configuration stays feasible
      // here; never report less than it achieves (the heuristic can dip).
      if (floor_solution) {
        const double floor_hits = floor_solution->hits(demand);
        if (floor_hits > result.hits) {
          result.solution = *floor_solution;
          result.hits = floor_hits;
          result.chr = floor_hits / std::max(demand.total(), 1e-300);
          result.gap = bound_gap(result.hits,
                                 std::max(result.upper_bound, result.hits));
        }
      }
      row.tau_s = config.fixed_tau_s;
      row.hits = result.hits;
      row.chr = result.chr;
      row.gap = result.gap;
      row.solver_status = solve_status_name(result.status);
      fill_split(row, result.solution, catalog);
      out.solutions.push_back(std::move(result.solution));
      out.traces.emplace_back();
    }
    out.rows.push_back(std::move(row));
  };

  auto run_reference = [&](const NetworkScenario& sc, double value,
                           const std::string& scheme, PointResult& out) {
    ReportRow row;
    row.axis_value = value;
    row.scheme = scheme;
    JointSolution sol;
    if (spec.axis == SweepAxis::TargetChr) {
      sol = scheme == "ref1"
                ? reference1_multibeam(sc, catalog, demand,
                                       BaselineObjective::MinimizeTimeToTargets)
                : reference2_widebeam(
                      sc, catalog, demand,
                      BaselineObjective::MinimizeTimeToTargets);
      row.solver_status = "greedy";
    } else {
      const double tau = tau_at(value);
      if (scheme == "ref1") {
        sol = reference1_multibeam(sc, catalog, demand,
                                   BaselineObjective::MaximizeHitsAtTau, tau);
        row.solver_status = "greedy";
      } else if (scheme == "ref2") {
        sol = reference2_widebeam(sc, catalog, demand,
                                  BaselineObjective::MaximizeHitsAtTau, tau);
        row.solver_status = "greedy";
      } else {
        auto hybrid = reference3_hybrid(sc, catalog, demand, tau);
        sol = std::move(hybrid.best);
        row.solver_status = "greedy_rho=" + fmt(hybrid.best_split);
      }
    }
    row.tau_s = sol.feeding_time_s;
    row.hits = sol.hits(demand);
    row.chr = row.hits / total_requests;
    fill_split(row, sol, catalog);
    out.solutions.push_back(std::move(sol));
    out.traces.emplace_back();
    out.rows.push_back(std::move(row));
  };

  auto run_point = [&](double value, PointResult& out) {
    try {
      NetworkScenario sc = scenario_at(value);
      for (const auto& scheme : spec.schemes) {
        if (scheme == "joint") {
          if (spec.compare_reuse) {
            NetworkScenario carrier = sc;
            carrier.reuse_mode = ReuseMode::Multicarrier;
            run_joint(carrier, value, "joint-multicarrier", out);
            // copy: the next run grows out.solutions and may reallocate
            const JointSolution carrier_solution = out.solutions.back();
            NetworkScenario reuse = sc;
            reuse.reuse_mode = ReuseMode::MultiSpotReuse;
            run_joint(reuse, value, "joint-multispot", out, &carrier_solution);
          } else {
            run_joint(sc, value, "joint", out);
          }
        } else {
          run_reference(sc, value, scheme, out);
        }
      }
    } catch (const Error& e) {
      out.error = std::string(errc_name(e.code())) + ": " + e.what();
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  };

  // Points are independent; run them in a small worker pool and assemble
  // the report in axis order.
  std::vector<PointResult> results(spec.values.size());
  const unsigned workers =
      std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                         static_cast<unsigned>(spec.values.size()));
  if (workers <= 1 || spec.values.size() == 1) {
    for (size_t i = 0; i < spec.values.size(); ++i) {
      run_point(spec.values[i], results[i]);
    }
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (;;) {
          size_t i = next.fetch_add(1);
          if (i >= spec.values.size()) return;
          run_point(spec.values[i], results[i]);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  SweepOutcome outcome;
  for (auto& point : results) {
    if (!point.error.empty()) {
      throw Error(Errc::NumericalFailure, "sweep point failed: " + point.error);
    }
    for (size_t k = 0; k < point.rows.size(); ++k) {
      outcome.rows.push_back(std::move(point.rows[k]));
      outcome.solutions.push_back(std::move(point.solutions[k]));
      outcome.traces.push_back(std::move(point.traces[k]));
    }
  }
  return outcome;
}

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << "axis_value,scheme,tau_s,hits,chr,wide_bits,spot_bits,"
         "solver_status,gap\n";
  for (const auto& row : rows) {
    out << fmt(row.axis_value) << ',' << row.scheme << ',' << fmt(row.tau_s)
        << ',' << fmt(row.hits) << ',' << fmt(row.chr) << ','
        << fmt(row.wide_bits) << ',' << fmt(row.spot_bits) << ','
        << row.solver_status << ',';
    if (row.gap >= 0.0) out << fmt(row.gap);
    out << '\n';
  }
}

void write_split_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << "axis_value,scheme,wide_bits,spot_bits\n";
  for (const auto& row : rows) {
    out << fmt(row.axis_value) << ',' << row.scheme << ','
        << fmt(row.wide_bits) << ',' << fmt(row.spot_bits) << '\n';
  }
}

std::string summary_json(const SweepSpec& spec,
                         const std::vector<ReportRow>& rows) {
  nlohmann::json doc;
  doc["axis"] = sweep_axis_name(spec.axis);
  doc["values"] = spec.values;
  doc["schemes"] = spec.schemes;
  doc["seed"] = spec.seed;
  doc["fixed_tau_s"] = spec.fixed_tau_s;
  doc["compare_reuse"] = spec.compare_reuse;
  doc["rows"] = rows.size();
  nlohmann::json out_rows = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json r;
    r["axis_value"] = row.axis_value;
    r["scheme"] = row.scheme;
    r["tau_s"] = row.tau_s;
    r["hits"] = row.hits;
    r["chr"] = row.chr;
    if (row.gap >= 0.0) r["gap"] = row.gap;
    out_rows.push_back(std::move(r));
  }
  doc["results"] = std::move(out_rows);
  return doc.dump(2);
}

std::string error_json(const std::string& code, const std::string& message) {
  nlohmann::json doc;
  doc["error"]["code"] = code;
  doc["error"]["message"] = message;
  return doc.dump();
}

}  // namespace satcache
