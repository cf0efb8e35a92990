#include "satcache/feedtime.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "satcache/baselines.hpp"

namespace satcache {

namespace {

// Items of one CDN ordered by hit density l/q, descending, ties toward the
// lower index. Shared ordering for greedy fills, evictions and repairs.
std::vector<int> density_order(const DemandMatrix& demand,
                               const ContentCatalog& catalog, int cdn) {
  std::vector<int> order(catalog.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return demand.at(cdn, a) * catalog.sizes_bits[b] >
           demand.at(cdn, b) * catalog.sizes_bits[a];
  });
  return order;
}

struct FractionalFill {
  double max_hits = 0.0;      // reachable within the cache (kappa_n)
  double load_to_target = 0.0;  // minimal bits to meet the target, if any
  bool target_reachable = false;
};

// One greedy density pass answering both feasibility questions for a CDN.
FractionalFill fractional_fill(const NetworkScenario& scenario,
                               const ContentCatalog& catalog,
                               const DemandMatrix& demand, int cdn) {
  FractionalFill fill;
  const double target = scenario.hit_targets[cdn];
  double cache_left = scenario.cache_size_bits[cdn];
  double hits = 0.0, load = 0.0;
  fill.target_reachable = target <= 0.0;
  for (int f : density_order(demand, catalog, cdn)) {
    if (cache_left <= 0.0) break;
    const double q = catalog.sizes_bits[f];
    const double l = demand.at(cdn, f);
    const double take = std::min(1.0, cache_left / q);
    if (!fill.target_reachable && hits + take * l >= target) {
      const double need = l > 0.0 ? (target - hits) / l : 0.0;
      fill.load_to_target = load + need * q;
      fill.target_reachable = true;
    }
    hits += take * l;
    load += take * q;
    cache_left -= take * q;
  }
  fill.max_hits = hits;
  return fill;
}

// Greedy broadcast set: grow by global density until every CDN meets its
// target through cache-constrained local storage. Mirrors the wide-beam
// reference scheme but only to seed the anchor.
struct BroadcastInit {
  bool feasible = false;
  double broadcast_bits = 0.0;
};

BroadcastInit greedy_broadcast_init(const NetworkScenario& scenario,
                                    const ContentCatalog& catalog,
                                    const DemandMatrix& demand) {
  const int N = scenario.num_cdns();
  const int F = catalog.size();
  std::vector<int> global_order(F);
  std::iota(global_order.begin(), global_order.end(), 0);
  std::stable_sort(global_order.begin(), global_order.end(), [&](int a, int b) {
    return demand.item_total(a) * catalog.sizes_bits[b] >
           demand.item_total(b) * catalog.sizes_bits[a];
  });
  std::vector<std::vector<int>> local_order;
  local_order.reserve(N);
  for (int n = 0; n < N; ++n) {
    local_order.push_back(density_order(demand, catalog, n));
  }

  std::vector<char> in_set(F, 0);
  BroadcastInit init;
  auto all_met = [&]() {
    for (int n = 0; n < N; ++n) {
      double cache_left = scenario.cache_size_bits[n];
      double hits = 0.0;
      for (int f : local_order[n]) {
        if (!in_set[f]) continue;
        if (catalog.sizes_bits[f] <= cache_left) {
          cache_left -= catalog.sizes_bits[f];
          hits += demand.at(n, f);
        }
      }
      if (hits < scenario.hit_targets[n]) return false;
    }
    return true;
  };

  if (all_met()) {
    init.feasible = true;
    return init;
  }
  for (int f : global_order) {
    in_set[f] = 1;
    init.broadcast_bits += catalog.sizes_bits[f];
    if (all_met()) {
      init.feasible = true;
      return init;
    }
  }
  return init;  // targets unreachable through a global ranking
}

// Rounds as usual, but any CDN that misses its target gets its cache
// rebuilt by a pure greedy density fill (stored-from-wide when the file is
// already broadcast, spot otherwise). Succeeds whenever plain greedy can
// meet the target.
JointSolution greedy_rebuild_recovery(const JointSolution& relaxed,
                                      const NetworkScenario& scenario,
                                      const ContentCatalog& catalog,
                                      const DemandMatrix& demand,
                                      double threshold) {
  const int N = scenario.num_cdns();
  const int F = catalog.size();
  JointSolution out = relaxed;
  for (int f = 0; f < F; ++f) {
    out.wide_broadcast[f] = relaxed.wide_broadcast[f] >= threshold ? 1.0 : 0.0;
  }
  for (int n = 0; n < N; ++n) {
    for (int f = 0; f < F; ++f) {
      bool stored =
          relaxed.stored(n, f) >= threshold && out.wide_broadcast[f] > 0.5;
      bool spotted = relaxed.spot(n, f) >= threshold && !stored;
      out.stored(n, f) = stored ? 1.0 : 0.0;
      out.spot(n, f) = spotted ? 1.0 : 0.0;
    }
  }
  for (int n = 0; n < N; ++n) {
    const auto order = density_order(demand, catalog, n);
    double cached = 0.0, hits = 0.0;
    for (int f = 0; f < F; ++f) {
      cached += catalog.sizes_bits[f] * (out.stored(n, f) + out.spot(n, f));
      hits += demand.at(n, f) * (out.stored(n, f) + out.spot(n, f));
    }
    for (auto it = order.rbegin();
         it != order.rend() && cached > scenario.cache_size_bits[n]; ++it) {
      if (out.stored(n, *it) > 0.5 || out.spot(n, *it) > 0.5) {
        cached -= catalog.sizes_bits[*it];
        hits -= demand.at(n, *it);
        out.stored(n, *it) = 0.0;
        out.spot(n, *it) = 0.0;
      }
    }
    if (hits >= scenario.hit_targets[n]) continue;
    // Fresh greedy fill for this CDN.
    cached = 0.0;
    hits = 0.0;
    for (int f = 0; f < F; ++f) {
      out.stored(n, f) = 0.0;
      out.spot(n, f) = 0.0;
    }
    for (int f : order) {
      if (hits >= scenario.hit_targets[n]) break;
      if (cached + catalog.sizes_bits[f] > scenario.cache_size_bits[n]) {
        continue;
      }
      if (out.wide_broadcast[f] > 0.5) {
        out.stored(n, f) = 1.0;
      } else {
        out.spot(n, f) = 1.0;
      }
      cached += catalog.sizes_bits[f];
      hits += demand.at(n, f);
    }
    if (hits < scenario.hit_targets[n]) {
      throw Error(Errc::InfeasibleAfterRounding,
                  "cdn " + std::to_string(n) +
                      " cannot reach its target even with a fresh greedy fill");
    }
  }
  for (int f = 0; f < F; ++f) {
    if (out.wide_broadcast[f] < 0.5) continue;
    bool used = false;
    for (int n = 0; n < N && !used; ++n) used = out.stored(n, f) > 0.5;
    if (!used) out.wide_broadcast[f] = 0.0;
  }
  return out;
}

// Transport-mode polish on a binary placement: cached content is kept as
// is, but each item may switch between one shared broadcast and per-CDN
// multicast, whichever ships faster. Rounding repair works per CDN through
// the spot path, which overpays badly for items many CDNs want.
void consolidate_transport(JointSolution& sol, const NetworkScenario& scenario,
                           const ContentCatalog& catalog) {
  const int N = scenario.num_cdns();
  const int F = catalog.size();
  auto tau_of = [&](const JointSolution& s) {
    return allocate_bandwidth(scenario, s.beam_loads_bits(catalog))
        .feeding_time_s;
  };

  // Free ride first: anything multicast while already broadcast.
  for (int f = 0; f < F; ++f) {
    if (sol.wide_broadcast[f] < 0.5) continue;
    for (int n = 0; n < N; ++n) {
      if (sol.spot(n, f) > 0.5) {
        sol.spot(n, f) = 0.0;
        sol.stored(n, f) = 1.0;
      }
    }
  }

  double tau = tau_of(sol);
  for (int pass = 0; pass < 10; ++pass) {
    bool improved = false;
    for (int f = 0; f < F; ++f) {
      JointSolution trial = sol;
      if (sol.wide_broadcast[f] < 0.5) {
        bool any = false;
        for (int n = 0; n < N; ++n) {
          if (trial.spot(n, f) > 0.5) {
            trial.spot(n, f) = 0.0;
            trial.stored(n, f) = 1.0;
            any = true;
          }
        }
        if (!any) continue;
        trial.wide_broadcast[f] = 1.0;
      } else {
        trial.wide_broadcast[f] = 0.0;
        for (int n = 0; n < N; ++n) {
          if (trial.stored(n, f) > 0.5) {
            trial.stored(n, f) = 0.0;
            trial.spot(n, f) = 1.0;
          }
        }
      }
      const double trial_tau = tau_of(trial);
      if (trial_tau < tau * (1.0 - 1e-12)) {
        sol = std::move(trial);
        tau = trial_tau;
        improved = true;
      }
    }
    if (!improved) break;
  }
}

// Drops cached items whose removal keeps every hit target met and saves
// transported bits. Rounding keeps whatever crossed the threshold and the
// integral repair overshoots, so minimal-time placements need this trim.
void trim_excess(JointSolution& sol, const NetworkScenario& scenario,
                 const ContentCatalog& catalog, const DemandMatrix& demand) {
  const int N = scenario.num_cdns();
  const int F = catalog.size();
  std::vector<int> wide_users(F, 0);
  for (int f = 0; f < F; ++f) {
    for (int n = 0; n < N; ++n) {
      if (sol.stored(n, f) > 0.5) ++wide_users[f];
    }
  }
  for (int n = 0; n < N; ++n) {
    double slack = -scenario.hit_targets[n];
    for (int f = 0; f < F; ++f) {
      slack += demand.at(n, f) * (sol.stored(n, f) + sol.spot(n, f));
    }
    bool improved = true;
    while (improved) {
      improved = false;
      int best_f = -1;
      double best_saving = 0.0;
      for (int f = 0; f < F; ++f) {
        const bool stored = sol.stored(n, f) > 0.5;
        const bool spotted = sol.spot(n, f) > 0.5;
        if (!stored && !spotted) continue;
        if (demand.at(n, f) > slack) continue;  // target would break
        // Transport saved: a spot copy always travels for this CDN alone; a
        // stored copy only frees the broadcast when nobody else keeps it.
        double saving = 0.0;
        if (spotted) {
          saving = catalog.sizes_bits[f] /
                   scenario.spot_beams[n].spectral_efficiency;
        } else if (wide_users[f] == 1) {
          saving = catalog.sizes_bits[f] /
                   scenario.wide_beam.spectral_efficiency;
        }
        if (saving > best_saving) {
          best_saving = saving;
          best_f = f;
        }
      }
      if (best_f < 0) break;
      slack -= demand.at(n, best_f);
      if (sol.stored(n, best_f) > 0.5) {
        sol.stored(n, best_f) = 0.0;
        if (--wide_users[best_f] == 0) sol.wide_broadcast[best_f] = 0.0;
      } else {
        sol.spot(n, best_f) = 0.0;
      }
      improved = true;
    }
  }
}

}  // namespace

JointSolution recover_binaries(const JointSolution& relaxed,
                               const NetworkScenario& scenario,
                               const ContentCatalog& catalog,
                               const DemandMatrix& demand,
                               const RecoveryOptions& options) {
  const int N = scenario.num_cdns();
  const int F = catalog.size();
  if (relaxed.num_cdns != N || relaxed.num_items != F) {
    throw Error(Errc::DimensionMismatch, "relaxed solution has wrong shape");
  }
  const double thr = options.threshold;

  JointSolution out = relaxed;
  // Threshold; exclusivity and the broadcast-store link by construction.
  for (int f = 0; f < F; ++f) {
    out.wide_broadcast[f] = relaxed.wide_broadcast[f] >= thr ? 1.0 : 0.0;
  }
  for (int n = 0; n < N; ++n) {
    for (int f = 0; f < F; ++f) {
      bool stored = relaxed.stored(n, f) >= thr && out.wide_broadcast[f] > 0.5;
      bool spotted = relaxed.spot(n, f) >= thr && !stored;
      out.stored(n, f) = stored ? 1.0 : 0.0;
      out.spot(n, f) = spotted ? 1.0 : 0.0;
    }
  }

  for (int n = 0; n < N; ++n) {
    const auto order = density_order(demand, catalog, n);

    // Cache repair: evict the worst density first.
    double cached = 0.0;
    for (int f = 0; f < F; ++f) {
      cached += catalog.sizes_bits[f] * (out.stored(n, f) + out.spot(n, f));
    }
    for (auto it = order.rbegin();
         it != order.rend() && cached > scenario.cache_size_bits[n]; ++it) {
      const int f = *it;
      if (out.stored(n, f) > 0.5 || out.spot(n, f) > 0.5) {
        out.stored(n, f) = 0.0;
        out.spot(n, f) = 0.0;
        cached -= catalog.sizes_bits[f];
      }
    }

    // Target repair: add the best unserved items through the spot path.
    double hits = 0.0;
    for (int f = 0; f < F; ++f) {
      hits += demand.at(n, f) * (out.stored(n, f) + out.spot(n, f));
    }
    if (hits < scenario.hit_targets[n]) {
      for (int f : order) {
        if (hits >= scenario.hit_targets[n]) break;
        if (out.stored(n, f) > 0.5 || out.spot(n, f) > 0.5) continue;
        if (cached + catalog.sizes_bits[f] > scenario.cache_size_bits[n]) {
          continue;  // does not fit, try the next candidate
        }
        out.spot(n, f) = 1.0;
        cached += catalog.sizes_bits[f];
        hits += demand.at(n, f);
      }
      if (hits < scenario.hit_targets[n]) {
        throw Error(Errc::InfeasibleAfterRounding,
                    "cdn " + std::to_string(n) +
                        " cannot reach its hit target after rounding");
      }
    }
  }

  // Broadcasts nobody stores only waste wide-beam capacity.
  for (int f = 0; f < F; ++f) {
    if (out.wide_broadcast[f] < 0.5) continue;
    bool used = false;
    for (int n = 0; n < N && !used; ++n) used = out.stored(n, f) > 0.5;
    if (!used) out.wide_broadcast[f] = 0.0;
  }
  return out;
}

FeedTimeResult minimize_feeding_time(const NetworkScenario& scenario,
                                     const ContentCatalog& catalog,
                                     const DemandMatrix& demand,
                                     const ScaConfig& config) {
  require_valid(scenario, catalog, demand);
  const int N = scenario.num_cdns();

  FeedTimeResult result;
  result.solution = JointSolution::zeros(N, catalog.size());

  // Feasibility of the targets against cache capacity, and the per-CDN
  // fractional loads used by the fallback anchor.
  bool all_zero_targets = true;
  std::vector<double> fallback_load(N, 0.0);
  for (int n = 0; n < N; ++n) {
    all_zero_targets = all_zero_targets && scenario.hit_targets[n] <= 0.0;
    auto fill = fractional_fill(scenario, catalog, demand, n);
    if (!fill.target_reachable) {
      throw Error(Errc::InfeasibleTargets,
                  "cdn " + std::to_string(n) + " can reach at most " +
                      std::to_string(fill.max_hits) + " hits, target " +
                      std::to_string(scenario.hit_targets[n]));
    }
    fallback_load[n] = fill.load_to_target;
  }
  if (all_zero_targets) {
    result.solution.diagnostics.solver_status = "trivial";
    result.trace.converged = true;
    return result;  // nothing to send
  }

  const Scaling scaling = Scaling::from(scenario, catalog, demand);

  // Anchor: uniform split; greedy broadcast feeding time, or the fractional
  // multicast bound when no global ranking can meet the targets.
  InnerAnchor anchor;
  anchor.bandwidth_hz.assign(N + 1,
                             scenario.total_bandwidth_hz / (N + 1));
  {
    auto init = greedy_broadcast_init(scenario, catalog, demand);
    double tau0;
    if (init.feasible) {
      tau0 = init.broadcast_bits /
             (anchor.bandwidth_hz[0] * scenario.wide_beam.spectral_efficiency);
    } else {
      tau0 = 0.0;
      for (int n = 0; n < N; ++n) {
        tau0 = std::max(tau0, fallback_load[n] /
                                  (anchor.bandwidth_hz[n + 1] *
                                   scenario.spot_beams[n].spectral_efficiency));
      }
    }
    anchor.tau_s = std::max(tau0, 1e-9 * scaling.time_s) * config.anchor_margin;
  }
  const double w_floor = 1e-4 * scenario.total_bandwidth_hz / (N + 1);

  JointSolution relaxed = result.solution;
  double tau_old = anchor.tau_s / scaling.time_s;
  double penalty_weight = 0.0;
  if (config.recovery == RecoveryPolicy::PenaltyDriven) {
    penalty_weight = config.penalty_initial * tau_old;
  }
  bool have_iterate = false;

  for (int iter = 0; iter < config.max_iters; ++iter) {
    InnerOptions options;
    options.objective = InnerObjective::MinimizeTau;
    if (penalty_weight > 0.0 && have_iterate) {
      PenaltyState pen;
      pen.weight = penalty_weight;
      pen.prev_x = relaxed.wide_broadcast;
      pen.prev_stored = relaxed.stored_from_wide;
      pen.prev_spot = relaxed.multicast;
      options.penalty = pen;
    }
    auto inner = build_inner_problem(scenario, catalog, demand, anchor, options);
    auto solved = solve_convex(inner.program, config.solver);

    ScaIterate record;
    record.status = solved.status;
    bool usable = solved.status == SolveStatus::Optimal;
    if (solved.status == SolveStatus::IterationLimit && have_iterate) {
      // A truncated solve is kept only when it respects the monotone
      // descent the outer iteration guarantees; anything else is noise.
      JointSolution candidate = inner.extract(solved.primal);
      const double cand_tau = candidate.feeding_time_s / scaling.time_s;
      usable = cand_tau > 0.0 && cand_tau <= tau_old * (1.0 + 1e-9) + 1e-12;
    }
    if (!usable) {
      if (!have_iterate) {
        throw Error(Errc::NumericalFailure,
                    "inner problem failed at the initial anchor: " +
                        solved.message);
      }
      break;  // keep the best iterate so far
    }
    relaxed = inner.extract(solved.primal);
    have_iterate = true;
    record.tau_s = relaxed.feeding_time_s;
    record.bandwidth_hz = relaxed.bandwidth_hz;
    record.binarity_gap = relaxed.binarity_gap();
    result.trace.iterations.push_back(record);

    const double tau_now = relaxed.feeding_time_s / scaling.time_s;
    const double error = std::abs(tau_now - tau_old);
    tau_old = tau_now;
    for (int k = 0; k <= N; ++k) {
      anchor.bandwidth_hz[k] = std::max(relaxed.bandwidth_hz[k], w_floor);
    }
    anchor.tau_s = std::max(relaxed.feeding_time_s, 1e-9 * scaling.time_s);

    if (penalty_weight > 0.0 &&
        relaxed.binarity_gap() >= config.binarity_tol) {
      penalty_weight *= config.penalty_growth;
    }
    if (error <= config.convergence_eps) {
      result.trace.converged = true;
      break;
    }
  }

  if (!have_iterate) {
    throw Error(Errc::NumericalFailure, "no usable relaxed iterate");
  }

  // Binary recovery, then the cheapest bandwidth split for the recovered
  // placement sets the final feeding time. The configured threshold is
  // tried alongside a spread of alternatives (a fractional iterate carries
  // no information about where 0.5 should cut), each polished by the trim
  // and transport-consolidation passes; the fastest recovery wins. When the
  // rounding repair cannot reach a target, the affected caches are rebuilt
  // greedily from scratch.
  JointSolution recovered = result.solution;
  double recovered_tau = std::numeric_limits<double>::infinity();
  auto consider_threshold = [&](double threshold) {
    JointSolution candidate;
    try {
      candidate = recover_binaries(relaxed, scenario, catalog, demand,
                                   {threshold});
    } catch (const Error& e) {
      if (e.code() != Errc::InfeasibleAfterRounding) throw;
      try {
        candidate = greedy_rebuild_recovery(relaxed, scenario, catalog,
                                            demand, threshold);
      } catch (const Error& inner) {
        if (inner.code() != Errc::InfeasibleAfterRounding) throw;
        return;  // this threshold is unrecoverable, try the others
      }
    }
    trim_excess(candidate, scenario, catalog, demand);
    consolidate_transport(candidate, scenario, catalog);
    trim_excess(candidate, scenario, catalog, demand);
    auto alloc =
        allocate_bandwidth(scenario, candidate.beam_loads_bits(catalog));
    candidate.bandwidth_hz = alloc.bandwidth_hz;
    candidate.feeding_time_s = alloc.feeding_time_s;
    if (alloc.feeding_time_s < recovered_tau) {
      recovered_tau = alloc.feeding_time_s;
      recovered = std::move(candidate);
    }
  };
  consider_threshold(config.round_threshold);
  for (double threshold : {0.15, 0.3, 0.7, 0.9}) {
    if (threshold != config.round_threshold) consider_threshold(threshold);
  }
  if (!std::isfinite(recovered_tau)) {
    throw Error(Errc::InfeasibleAfterRounding,
                "no rounding threshold yields a repairable placement");
  }

  // Safety net: pure greedy constructions (multicast-only and
  // broadcast-only fills, consolidated and with re-optimized bandwidth) cap
  // the damage a bad rounding can do. The relaxation already had a smaller
  // objective, so this floor only ever replaces a degraded recovery.
  auto consider_floor = [&](JointSolution candidate) {
    consolidate_transport(candidate, scenario, catalog);
    auto alloc =
        allocate_bandwidth(scenario, candidate.beam_loads_bits(catalog));
    candidate.bandwidth_hz = alloc.bandwidth_hz;
    candidate.feeding_time_s = alloc.feeding_time_s;
    if (alloc.feeding_time_s < recovered.feeding_time_s) {
      candidate.diagnostics = recovered.diagnostics;
      recovered = std::move(candidate);
    }
  };
  try {
    consider_floor(reference1_multibeam(
        scenario, catalog, demand, BaselineObjective::MinimizeTimeToTargets));
  } catch (const Error&) {
  }
  try {
    consider_floor(reference2_widebeam(
        scenario, catalog, demand, BaselineObjective::MinimizeTimeToTargets));
  } catch (const Error&) {
  }

  recovered.diagnostics.iterations =
      static_cast<int>(result.trace.iterations.size());
  recovered.diagnostics.relaxation_residual = relaxed.binarity_gap();
  recovered.diagnostics.converged = result.trace.converged;
  recovered.diagnostics.solver_status =
      result.trace.converged ? "converged" : "max_iters";
  for (const auto& it : result.trace.iterations) {
    recovered.diagnostics.objective_trace.push_back(it.tau_s);
  }

  result.solution = std::move(recovered);
  return result;
}

void write_trace_csv(std::ostream& out, const ScaTrace& trace) {
  out << "iter,tau,binarity_gap,status\n";
  for (size_t i = 0; i < trace.iterations.size(); ++i) {
    const auto& it = trace.iterations[i];
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%zu,%.10g,%.10g,%s\n", i, it.tau_s,
                  it.binarity_gap, solve_status_name(it.status));
    out << buf;
  }
}

}  // namespace satcache
