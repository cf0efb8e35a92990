#include "satcache/hits.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <queue>
#include <vector>

namespace satcache {

namespace {

// Binary placement plus the running totals the local search needs.
struct Placement {
  std::vector<char> wide;           // x, F
  std::vector<char> stored, spot;   // N*F
  std::vector<double> cached_bits;  // per CDN
  std::vector<double> loads_bits;   // N+1, index 0 wide
  double hits = 0.0;

  int N = 0, F = 0;
  char& st(int n, int f) { return stored[static_cast<size_t>(n) * F + f]; }
  char& sp(int n, int f) { return spot[static_cast<size_t>(n) * F + f]; }
  char st(int n, int f) const { return stored[static_cast<size_t>(n) * F + f]; }
  char sp(int n, int f) const { return spot[static_cast<size_t>(n) * F + f]; }
};

struct HitsLp {
  ConvexProgram program;
  VarLayout layout;
  Scaling scaling;
  double tau_norm = 0.0;
};

// The linear program of the fixed-time problem: hit maximization objective,
// linear throughput rows, cache, exclusivity, broadcast link and budget.
// Binaries relaxed to [0,1]; branching fixes them through the bounds.
HitsLp build_hits_lp(const NetworkScenario& scenario,
                     const ContentCatalog& catalog, const DemandMatrix& demand,
                     double tau_s) {
  const int F = catalog.size();
  const int N = scenario.num_cdns();

  HitsLp lp;
  lp.scaling = Scaling::from(scenario, catalog, demand);
  lp.layout.num_items = F;
  lp.layout.num_cdns = N;
  lp.layout.num_colors = scenario.num_colors();
  lp.tau_norm = tau_s / lp.scaling.time_s;
  const Scaling& sc = lp.scaling;

  std::vector<double> q(F), q_cap(F);
  for (int f = 0; f < F; ++f) {
    q[f] = catalog.sizes_bits[f] / sc.size_bits;
    q_cap[f] = catalog.sizes_bits[f] / sc.catalog_bits;
  }
  std::vector<double> gamma(N + 1);
  gamma[0] = scenario.wide_beam.spectral_efficiency / sc.efficiency;
  for (int n = 0; n < N; ++n) {
    gamma[n + 1] = scenario.spot_beams[n].spectral_efficiency / sc.efficiency;
  }

  ConvexProgram& prog = lp.program;
  for (int f = 0; f < F; ++f) {
    prog.add_var("x[" + std::to_string(f) + "]", 0.0, 1.0);
  }
  for (int n = 0; n < N; ++n) {
    for (int f = 0; f < F; ++f) {
      prog.add_var("xs[" + std::to_string(n) + "," + std::to_string(f) + "]",
                   0.0, 1.0);
    }
  }
  for (int n = 0; n < N; ++n) {
    for (int f = 0; f < F; ++f) {
      prog.add_var("y[" + std::to_string(n) + "," + std::to_string(f) + "]",
                   0.0, 1.0);
    }
  }
  for (int k = 0; k <= N; ++k) {
    prog.add_var("w[" + std::to_string(k) + "]", 0.0, 1.0);
  }
  prog.add_var("tau", lp.tau_norm, lp.tau_norm);
  for (int c = 0; c < lp.layout.num_colors; ++c) {
    prog.add_var("band[" + std::to_string(c) + "]", 0.0, 1.0);
  }
  const VarLayout& L = lp.layout;

  for (int n = 0; n < N; ++n) {
    for (int f = 0; f < F; ++f) {
      double l = demand.at(n, f) / sc.demand;
      prog.objective[L.stored(n, f)] -= l;
      prog.objective[L.spot(n, f)] -= l;
    }
  }

  // Throughput, linear at fixed tau: load <= gamma * tau * w.
  {
    auto& con = prog.add_constraint("wide_capacity");
    for (int f = 0; f < F; ++f) con.linear.push_back({L.x(f), q_cap[f]});
    con.linear.push_back({L.bandwidth(0), -gamma[0] * lp.tau_norm});
  }
  for (int n = 0; n < N; ++n) {
    auto& con = prog.add_constraint("spot_capacity[" + std::to_string(n) + "]");
    for (int f = 0; f < F; ++f) {
      con.linear.push_back({L.spot(n, f), q_cap[f]});
    }
    con.linear.push_back({L.bandwidth(n + 1), -gamma[n + 1] * lp.tau_norm});
  }

  for (int n = 0; n < N; ++n) {
    auto& con = prog.add_constraint("cache[" + std::to_string(n) + "]");
    for (int f = 0; f < F; ++f) {
      con.linear.push_back({L.stored(n, f), q[f]});
      con.linear.push_back({L.spot(n, f), q[f]});
    }
    con.constant = -scenario.cache_size_bits[n] / sc.size_bits;
  }

  for (int n = 0; n < N; ++n) {
    for (int f = 0; f < F; ++f) {
      auto& excl = prog.add_constraint("excl");
      excl.linear.push_back({L.stored(n, f), 1.0});
      excl.linear.push_back({L.spot(n, f), 1.0});
      excl.constant = -1.0;
      auto& link = prog.add_constraint("link");
      link.linear.push_back({L.stored(n, f), 1.0});
      link.linear.push_back({L.x(f), -1.0});
    }
  }

  {
    BandwidthBudget budget = bandwidth_budget_constraints(scenario);
    for (const auto& row : budget.rows) {
      auto& con = prog.add_constraint(row.name);
      for (const auto& [beam, coeff] : row.beam_terms) {
        con.linear.push_back({L.bandwidth(beam), coeff});
      }
      for (const auto& [band, coeff] : row.band_terms) {
        con.linear.push_back({L.color_band(band), coeff});
      }
      con.constant = -row.rhs / sc.bandwidth_hz;
    }
  }
  return lp;
}

Placement placement_from_solution(const JointSolution& sol,
                                  const NetworkScenario& scenario,
                                  const ContentCatalog& catalog,
                                  const DemandMatrix& demand) {
  Placement p;
  p.N = scenario.num_cdns();
  p.F = catalog.size();
  p.wide.assign(p.F, 0);
  p.stored.assign(static_cast<size_t>(p.N) * p.F, 0);
  p.spot.assign(static_cast<size_t>(p.N) * p.F, 0);
  p.cached_bits.assign(p.N, 0.0);
  p.loads_bits.assign(p.N + 1, 0.0);
  for (int f = 0; f < p.F; ++f) {
    p.wide[f] = sol.wide_broadcast[f] > 0.5 ? 1 : 0;
    if (p.wide[f]) p.loads_bits[0] += catalog.sizes_bits[f];
  }
  for (int n = 0; n < p.N; ++n) {
    for (int f = 0; f < p.F; ++f) {
      if (sol.stored(n, f) > 0.5) {
        p.st(n, f) = 1;
        p.cached_bits[n] += catalog.sizes_bits[f];
        p.hits += demand.at(n, f);
      } else if (sol.spot(n, f) > 0.5) {
        p.sp(n, f) = 1;
        p.cached_bits[n] += catalog.sizes_bits[f];
        p.loads_bits[n + 1] += catalog.sizes_bits[f];
        p.hits += demand.at(n, f);
      }
    }
  }
  return p;
}

JointSolution placement_to_solution(const Placement& p,
                                    const NetworkScenario& scenario,
                                    double tau_s) {
  JointSolution sol = JointSolution::zeros(p.N, p.F);
  for (int f = 0; f < p.F; ++f) sol.wide_broadcast[f] = p.wide[f] ? 1.0 : 0.0;
  for (int n = 0; n < p.N; ++n) {
    for (int f = 0; f < p.F; ++f) {
      sol.stored(n, f) = p.st(n, f) ? 1.0 : 0.0;
      sol.spot(n, f) = p.sp(n, f) ? 1.0 : 0.0;
    }
  }
  sol.feeding_time_s = tau_s;
  auto need = min_spectrum_for_loads(scenario, p.loads_bits, tau_s);
  sol.bandwidth_hz = need.bandwidth_hz;
  return sol;
}

// Drops broadcasts that no CDN stores; they only consume wide capacity.
void prune_dangling_broadcasts(Placement& p, const ContentCatalog& catalog) {
  for (int f = 0; f < p.F; ++f) {
    if (!p.wide[f]) continue;
    bool used = false;
    for (int n = 0; n < p.N && !used; ++n) used = p.st(n, f);
    if (!used) {
      p.wide[f] = 0;
      p.loads_bits[0] -= catalog.sizes_bits[f];
    }
  }
}

bool spectrum_ok(const NetworkScenario& scenario,
                 const std::vector<double>& loads, double tau_s) {
  auto need = min_spectrum_for_loads(scenario, loads, tau_s);
  return need.total_hz <=
         scenario.total_bandwidth_hz * (1.0 + 1e-12) + 1e-9;
}

// Rounding a relaxed LP point can overrun caches and beam capacity; evict
// the lowest-density cached entries until everything fits again.
void repair_placement(Placement& p, const NetworkScenario& scenario,
                      const ContentCatalog& catalog, const DemandMatrix& demand,
                      double tau_s) {
  // Cache overruns, per CDN, worst density evicted first.
  for (int n = 0; n < p.N; ++n) {
    if (p.cached_bits[n] <= scenario.cache_size_bits[n]) continue;
    std::vector<int> order(p.F);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return demand.at(n, a) * catalog.sizes_bits[b] <
             demand.at(n, b) * catalog.sizes_bits[a];
    });
    for (int f : order) {
      if (p.cached_bits[n] <= scenario.cache_size_bits[n]) break;
      if (p.st(n, f)) {
        p.st(n, f) = 0;
      } else if (p.sp(n, f)) {
        p.sp(n, f) = 0;
        p.loads_bits[n + 1] -= catalog.sizes_bits[f];
      } else {
        continue;
      }
      p.cached_bits[n] -= catalog.sizes_bits[f];
      p.hits -= demand.at(n, f);
    }
  }
  prune_dangling_broadcasts(p, catalog);

  // Spectrum overrun: evict globally, lowest density first.
  while (!spectrum_ok(scenario, p.loads_bits, tau_s)) {
    int best_n = -1, best_f = -1;
    double best_density = std::numeric_limits<double>::infinity();
    for (int n = 0; n < p.N; ++n) {
      for (int f = 0; f < p.F; ++f) {
        if (!p.st(n, f) && !p.sp(n, f)) continue;
        double density = demand.at(n, f) / catalog.sizes_bits[f];
        if (density < best_density) {
          best_density = density;
          best_n = n;
          best_f = f;
        }
      }
    }
    if (best_n < 0) break;  // nothing cached, nothing to free
    if (p.st(best_n, best_f)) {
      p.st(best_n, best_f) = 0;
    } else {
      p.sp(best_n, best_f) = 0;
      p.loads_bits[best_n + 1] -= catalog.sizes_bits[best_f];
    }
    p.cached_bits[best_n] -= catalog.sizes_bits[best_f];
    p.hits -= demand.at(best_n, best_f);
    prune_dangling_broadcasts(p, catalog);
  }
}

// Best-improvement local search: add unserved items (via an existing
// broadcast, the spot path, or a fresh broadcast) and one-for-one swaps
// inside a CDN's cache, while every constraint keeps holding.
void hill_climb(Placement& p, const NetworkScenario& scenario,
                const ContentCatalog& catalog, const DemandMatrix& demand,
                double tau_s) {
  enum class Kind { StoreExisting, Spot, Broadcast };
  struct Move {
    double gain = 0.0;
    Kind kind = Kind::Spot;
    int n = -1, f_in = -1, f_out = -1;  // f_out < 0 for pure adds
  };

  auto try_feasible = [&](int n, int f_in, int f_out, Kind kind) {
    const double q_in = catalog.sizes_bits[f_in];
    double cache_after = p.cached_bits[n] + q_in -
                         (f_out >= 0 ? catalog.sizes_bits[f_out] : 0.0);
    if (cache_after > scenario.cache_size_bits[n]) return false;
    std::vector<double> loads = p.loads_bits;
    if (f_out >= 0) {
      if (p.sp(n, f_out)) loads[n + 1] -= catalog.sizes_bits[f_out];
      // dropping a stored copy can strand its broadcast; handled after apply
    }
    if (kind == Kind::Spot) loads[n + 1] += q_in;
    if (kind == Kind::Broadcast) loads[0] += q_in;
    return spectrum_ok(scenario, loads, tau_s);
  };

  for (int round = 0; round < 4 * (p.N + 1) * p.F; ++round) {
    Move best;
    for (int n = 0; n < p.N; ++n) {
      for (int f = 0; f < p.F; ++f) {
        if (p.st(n, f) || p.sp(n, f)) continue;
        const double gain = demand.at(n, f);
        if (gain <= best.gain) continue;
        Kind kind = p.wide[f] ? Kind::StoreExisting
                              : Kind::Spot;  // prefer the free ride
        if (try_feasible(n, f, -1, kind)) {
          best = {gain, kind, n, f, -1};
        } else if (!p.wide[f] && try_feasible(n, f, -1, Kind::Broadcast)) {
          best = {gain, Kind::Broadcast, n, f, -1};
        }
      }
    }
    // Swaps only when no pure add improves; keeps the scan quadratic-free
    // on easy instances.
    if (best.gain <= 0.0) {
      for (int n = 0; n < p.N; ++n) {
        for (int f_out = 0; f_out < p.F; ++f_out) {
          if (!p.st(n, f_out) && !p.sp(n, f_out)) continue;
          for (int f_in = 0; f_in < p.F; ++f_in) {
            if (p.st(n, f_in) || p.sp(n, f_in) || f_in == f_out) continue;
            const double gain = demand.at(n, f_in) - demand.at(n, f_out);
            if (gain <= best.gain || gain <= 1e-12) continue;
            Kind kind = p.wide[f_in] ? Kind::StoreExisting : Kind::Spot;
            if (try_feasible(n, f_in, f_out, kind)) {
              best = {gain, kind, n, f_in, f_out};
            } else if (!p.wide[f_in] &&
                       try_feasible(n, f_in, f_out, Kind::Broadcast)) {
              best = {gain, Kind::Broadcast, n, f_in, f_out};
            }
          }
        }
      }
    }
    if (best.gain <= 0.0) break;

    if (best.f_out >= 0) {
      const double q_out = catalog.sizes_bits[best.f_out];
      if (p.st(best.n, best.f_out)) {
        p.st(best.n, best.f_out) = 0;
      } else {
        p.sp(best.n, best.f_out) = 0;
        p.loads_bits[best.n + 1] -= q_out;
      }
      p.cached_bits[best.n] -= q_out;
      p.hits -= demand.at(best.n, best.f_out);
    }
    const double q_in = catalog.sizes_bits[best.f_in];
    switch (best.kind) {
      case Kind::StoreExisting:
        p.st(best.n, best.f_in) = 1;
        break;
      case Kind::Spot:
        p.sp(best.n, best.f_in) = 1;
        p.loads_bits[best.n + 1] += q_in;
        break;
      case Kind::Broadcast:
        p.wide[best.f_in] = 1;
        p.loads_bits[0] += q_in;
        p.st(best.n, best.f_in) = 1;
        break;
    }
    p.cached_bits[best.n] += q_in;
    p.hits += demand.at(best.n, best.f_in);
    prune_dangling_broadcasts(p, catalog);
  }
}

struct BnbNode {
  double bound = 0.0;  // raw hits upper bound from the parent LP
  int64_t id = 0;
  std::vector<std::pair<int, double>> fixings;  // (var, value)
};

struct BnbOrder {
  bool operator()(const BnbNode& a, const BnbNode& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;  // best bound first
    return a.id > b.id;
  }
};

}  // namespace

double bound_gap(double incumbent, double upper_bound) {
  return (upper_bound - incumbent) / std::max(1.0, upper_bound);
}

HitsResult maximize_hits(const NetworkScenario& scenario,
                         const ContentCatalog& catalog,
                         const DemandMatrix& demand, const MbipConfig& config) {
  require_valid(scenario, catalog, demand);
  const int N = scenario.num_cdns();
  const int F = catalog.size();

  HitsResult result;
  result.solution = JointSolution::zeros(N, F);
  result.solution.feeding_time_s = std::max(config.fixed_tau_s, 0.0);
  if (config.fixed_tau_s <= 0.0) {
    // No transmission window: zero caching is the only (and optimal) point.
    result.status = SolveStatus::Optimal;
    return result;
  }

  HitsLp lp = build_hits_lp(scenario, catalog, demand, config.fixed_tau_s);
  const double total_requests = std::max(demand.total(), 1e-300);

  auto solve_relaxation = [&](const std::vector<std::pair<int, double>>& fix,
                              SolverResult* out) {
    for (const auto& [var, value] : fix) {
      lp.program.lower[var] = value;
      lp.program.upper[var] = value;
    }
    *out = solve_convex(lp.program, config.solver);
    for (const auto& [var, value] : fix) {
      (void)value;
      lp.program.lower[var] = 0.0;
      lp.program.upper[var] = 1.0;
    }
  };

  auto raw_hits_bound = [&](const SolverResult& solved) {
    // -objective is the primal's normalized hit count; the complementarity
    // gap plus a safety pad turns it into a true upper bound.
    double primal = -solved.objective;
    double pad = std::max(solved.duality_gap, 0.0) + 1e-9 * (1.0 + primal);
    return (primal + pad) * lp.scaling.demand;
  };

  auto round_and_polish = [&](const SolverResult& solved) {
    JointSolution relaxed = result.solution;
    const VarLayout& L = lp.layout;
    for (int f = 0; f < F; ++f) {
      relaxed.wide_broadcast[f] = solved.primal[L.x(f)];
    }
    for (int n = 0; n < N; ++n) {
      for (int f = 0; f < F; ++f) {
        relaxed.stored(n, f) =
            solved.primal[L.stored(n, f)] >= 0.5 &&
                    solved.primal[L.x(f)] >= 0.5
                ? 1.0
                : 0.0;
        relaxed.spot(n, f) = solved.primal[L.spot(n, f)] >= 0.5 &&
                                     relaxed.stored(n, f) < 0.5
                                 ? 1.0
                                 : 0.0;
      }
    }
    for (int f = 0; f < F; ++f) {
      relaxed.wide_broadcast[f] = relaxed.wide_broadcast[f] >= 0.5 ? 1.0 : 0.0;
    }
    Placement p = placement_from_solution(relaxed, scenario, catalog, demand);
    repair_placement(p, scenario, catalog, demand, config.fixed_tau_s);
    hill_climb(p, scenario, catalog, demand, config.fixed_tau_s);
    return p;
  };

  if (config.method == HitsMethod::RelaxRoundRepair) {
    SolverResult solved;
    solve_relaxation({}, &solved);
    if (solved.status != SolveStatus::Optimal &&
        solved.status != SolveStatus::IterationLimit) {
      throw Error(Errc::NumericalFailure,
                  "hits relaxation failed: " + solved.message);
    }
    Placement p = round_and_polish(solved);
    result.solution =
        placement_to_solution(p, scenario, config.fixed_tau_s);
    result.hits = p.hits;
    result.chr = p.hits / total_requests;
    result.upper_bound = raw_hits_bound(solved);
    result.gap = bound_gap(result.hits, result.upper_bound);
    result.status = solved.status;
    result.nodes_explored = 1;
    return result;
  }

  // Branch and bound, best bound first, most fractional variable. The
  // zero placement is always feasible and seeds the incumbent.
  std::priority_queue<BnbNode, std::vector<BnbNode>, BnbOrder> open;
  int64_t next_id = 0;
  Placement incumbent =
      placement_from_solution(result.solution, scenario, catalog, demand);
  double incumbent_hits = 0.0;
  bool have_incumbent = false;
  double global_bound = std::numeric_limits<double>::infinity();

  open.push({std::numeric_limits<double>::infinity(), next_id++, {}});
  int64_t nodes = 0;
  bool closed = true;

  while (!open.empty()) {
    BnbNode node = open.top();
    open.pop();
    global_bound = node.bound;
    if (have_incumbent &&
        bound_gap(incumbent_hits, node.bound) <= config.gap_tol) {
      global_bound = node.bound;
      break;  // nothing left that can beat the incumbent
    }
    if (nodes++ >= config.node_limit) {
      closed = false;
      break;
    }

    SolverResult solved;
    solve_relaxation(node.fixings, &solved);
    if (solved.status == SolveStatus::Infeasible) continue;
    if (solved.status != SolveStatus::Optimal &&
        solved.status != SolveStatus::IterationLimit) {
      closed = false;
      continue;
    }
    const double node_bound = raw_hits_bound(solved);
    if (have_incumbent &&
        bound_gap(incumbent_hits, node_bound) <= config.gap_tol) {
      continue;  // pruned by bound
    }

    // Most fractional caching variable; ties by demand weight, then index.
    int branch_var = -1;
    double best_frac = 1e-6;
    double best_weight = -1.0;
    const VarLayout& L = lp.layout;
    auto consider = [&](int var, double weight) {
      double v = solved.primal[var];
      double frac = std::min(v, 1.0 - v);
      if (frac > best_frac ||
          (frac > best_frac * (1.0 - 1e-12) && weight > best_weight)) {
        branch_var = var;
        best_frac = frac;
        best_weight = weight;
      }
    };
    for (int f = 0; f < F; ++f) consider(L.x(f), demand.item_total(f));
    for (int n = 0; n < N; ++n) {
      for (int f = 0; f < F; ++f) {
        consider(L.stored(n, f), demand.at(n, f));
        consider(L.spot(n, f), demand.at(n, f));
      }
    }

    // Rounding the relaxation gives a feasible candidate; the polish pass
    // is worth its cost at the root, on near-integral nodes, and
    // periodically for pruning power.
    if (branch_var < 0 || nodes == 1 || nodes % 8 == 0) {
      Placement candidate = round_and_polish(solved);
      if (!have_incumbent || candidate.hits > incumbent_hits) {
        incumbent = candidate;
        incumbent_hits = candidate.hits;
        have_incumbent = true;
      }
    }
    if (branch_var < 0) continue;  // integral relaxation handled above

    for (double value : {0.0, 1.0}) {
      BnbNode child;
      child.bound = node_bound;
      child.id = next_id++;
      child.fixings = node.fixings;
      child.fixings.push_back({branch_var, value});
      open.push(child);
    }
  }

  if (open.empty()) {
    global_bound = have_incumbent ? incumbent_hits : 0.0;
  }
  result.solution =
      placement_to_solution(incumbent, scenario, config.fixed_tau_s);
  result.hits = incumbent_hits;
  result.chr = incumbent_hits / total_requests;
  result.upper_bound = std::max(global_bound, incumbent_hits);
  result.gap = bound_gap(result.hits, result.upper_bound);
  result.nodes_explored = nodes;
  result.status = closed || result.gap <= config.gap_tol
                      ? SolveStatus::Optimal
                      : SolveStatus::IterationLimit;
  return result;
}

void write_hits_csv(std::ostream& out, const HitsResult& result,
                    const NetworkScenario& scenario,
                    const ContentCatalog& catalog) {
  char head[128];
  std::snprintf(head, sizeof(head), "# hits=%.10g chr=%.10g gap=%.10g\n",
                result.hits, result.chr, result.gap);
  out << head << "cdn_id,item_id,via\n";
  const auto& sol = result.solution;
  for (int n = 0; n < sol.num_cdns; ++n) {
    for (int f = 0; f < sol.num_items; ++f) {
      if (sol.stored(n, f) > 0.5) {
        out << scenario.spot_beams[n].beam_id << ',' << catalog.ids[f]
            << ",wide\n";
      } else if (sol.spot(n, f) > 0.5) {
        out << scenario.spot_beams[n].beam_id << ',' << catalog.ids[f]
            << ",spot\n";
      }
    }
  }
}

}  // namespace satcache
