#include "satcache/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace satcache {

namespace {

std::vector<int> local_density_order(const DemandMatrix& demand,
                                     const ContentCatalog& catalog, int cdn) {
  std::vector<int> order(catalog.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return demand.at(cdn, a) * catalog.sizes_bits[b] >
           demand.at(cdn, b) * catalog.sizes_bits[a];
  });
  return order;
}

std::vector<int> global_density_order(const DemandMatrix& demand,
                                      const ContentCatalog& catalog) {
  std::vector<int> order(catalog.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return demand.item_total(a) * catalog.sizes_bits[b] >
           demand.item_total(b) * catalog.sizes_bits[a];
  });
  return order;
}

struct CdnFill {
  double hits = 0.0;
  double spot_load_bits = 0.0;
};

// One CDN's greedy fill by local density: store items already in the
// broadcast set for free transport, multicast the rest within the bit
// budget; stop early once an optional target is met.
CdnFill fill_cdn(JointSolution& sol, const NetworkScenario& scenario,
                 const ContentCatalog& catalog, const DemandMatrix& demand,
                 int cdn, const std::vector<char>& broadcast_set,
                 double multicast_budget_bits, double target_hits) {
  CdnFill fill;
  double cache_left = scenario.cache_size_bits[cdn];
  double budget_left = multicast_budget_bits;
  for (int f : local_density_order(demand, catalog, cdn)) {
    if (target_hits >= 0.0 && fill.hits >= target_hits) break;
    const double q = catalog.sizes_bits[f];
    if (q > cache_left) continue;
    if (broadcast_set[f]) {
      sol.stored(cdn, f) = 1.0;
    } else if (q <= budget_left) {
      sol.spot(cdn, f) = 1.0;
      budget_left -= q;
      fill.spot_load_bits += q;
    } else {
      continue;
    }
    cache_left -= q;
    fill.hits += demand.at(cdn, f);
  }
  return fill;
}

constexpr double kNoTarget = -1.0;
constexpr double kUnlimited = std::numeric_limits<double>::infinity();

}  // namespace

JointSolution reference1_multibeam(const NetworkScenario& scenario,
                                   const ContentCatalog& catalog,
                                   const DemandMatrix& demand,
                                   BaselineObjective objective, double tau_s) {
  require_valid(scenario, catalog, demand);
  const int N = scenario.num_cdns();
  const double share = scenario.total_bandwidth_hz / N;

  JointSolution sol = JointSolution::zeros(N, catalog.size());
  std::vector<char> no_broadcast(catalog.size(), 0);
  sol.bandwidth_hz[0] = 0.0;
  for (int n = 0; n < N; ++n) sol.bandwidth_hz[n + 1] = share;

  if (objective == BaselineObjective::MaximizeHitsAtTau) {
    for (int n = 0; n < N; ++n) {
      const double budget =
          share * scenario.spot_beams[n].spectral_efficiency * tau_s;
      fill_cdn(sol, scenario, catalog, demand, n, no_broadcast, budget,
               kNoTarget);
    }
    sol.feeding_time_s = tau_s;
    return sol;
  }

  // Time objective: every CDN grows its fill until the target is met; the
  // feeding time is set by the slowest CDN.
  double tau = 0.0;
  for (int n = 0; n < N; ++n) {
    auto fill = fill_cdn(sol, scenario, catalog, demand, n, no_broadcast,
                         kUnlimited, scenario.hit_targets[n]);
    if (fill.hits < scenario.hit_targets[n]) {
      throw Error(Errc::InfeasibleTargets,
                  "reference 1 cannot reach the target of cdn " +
                      std::to_string(n));
    }
    tau = std::max(tau, fill.spot_load_bits /
                            (share * scenario.spot_beams[n].spectral_efficiency));
  }
  sol.feeding_time_s = tau;
  return sol;
}

JointSolution reference2_widebeam(const NetworkScenario& scenario,
                                  const ContentCatalog& catalog,
                                  const DemandMatrix& demand,
                                  BaselineObjective objective, double tau_s) {
  require_valid(scenario, catalog, demand);
  const int N = scenario.num_cdns();
  const int F = catalog.size();
  const double gamma0 = scenario.wide_beam.spectral_efficiency;

  JointSolution sol = JointSolution::zeros(N, F);
  sol.bandwidth_hz[0] = scenario.total_bandwidth_hz;
  std::vector<char> broadcast(F, 0);
  const auto order = global_density_order(demand, catalog);

  auto refill_all = [&](double* worst_slack) {
    std::fill(sol.stored_from_wide.begin(), sol.stored_from_wide.end(), 0.0);
    bool all_met = true;
    if (worst_slack) *worst_slack = 0.0;
    for (int n = 0; n < N; ++n) {
      auto fill =
          fill_cdn(sol, scenario, catalog, demand, n, broadcast, 0.0,
                   objective == BaselineObjective::MinimizeTimeToTargets
                       ? scenario.hit_targets[n]
                       : kNoTarget);
      all_met = all_met && fill.hits >= scenario.hit_targets[n];
    }
    return all_met;
  };

  if (objective == BaselineObjective::MaximizeHitsAtTau) {
    double budget = scenario.total_bandwidth_hz * gamma0 * tau_s;
    double load = 0.0;
    for (int f : order) {
      if (load + catalog.sizes_bits[f] <= budget) {
        broadcast[f] = 1;
        load += catalog.sizes_bits[f];
        sol.wide_broadcast[f] = 1.0;
      }
    }
    refill_all(nullptr);
    sol.feeding_time_s = tau_s;
    return sol;
  }

  // Time objective: grow the broadcast set until every target is met.
  double load = 0.0;
  bool met = refill_all(nullptr);
  size_t next = 0;
  while (!met && next < order.size()) {
    int f = order[next++];
    broadcast[f] = 1;
    sol.wide_broadcast[f] = 1.0;
    load += catalog.sizes_bits[f];
    met = refill_all(nullptr);
  }
  if (!met) {
    throw Error(Errc::InfeasibleTargets,
                "reference 2 cannot reach every target through a global "
                "ranking");
  }
  sol.feeding_time_s = load / (scenario.total_bandwidth_hz * gamma0);
  return sol;
}

HybridResult reference3_hybrid(const NetworkScenario& scenario,
                               const ContentCatalog& catalog,
                               const DemandMatrix& demand, double tau_s,
                               const std::vector<double>& split_grid) {
  require_valid(scenario, catalog, demand);
  const int N = scenario.num_cdns();
  const int F = catalog.size();
  const double gamma0 = scenario.wide_beam.spectral_efficiency;
  std::vector<double> grid = split_grid;
  if (grid.empty()) {
    for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  }

  HybridResult result;
  double best_hits = -1.0;
  const auto order = global_density_order(demand, catalog);

  for (double rho : grid) {
    JointSolution sol = JointSolution::zeros(N, F);
    const double w0 = rho * scenario.total_bandwidth_hz;
    const double share = (1.0 - rho) * scenario.total_bandwidth_hz / N;
    sol.bandwidth_hz[0] = w0;
    for (int n = 0; n < N; ++n) sol.bandwidth_hz[n + 1] = share;

    std::vector<char> broadcast(F, 0);
    double budget = w0 * gamma0 * tau_s;
    double load = 0.0;
    for (int f : order) {
      if (load + catalog.sizes_bits[f] <= budget) {
        broadcast[f] = 1;
        load += catalog.sizes_bits[f];
        sol.wide_broadcast[f] = 1.0;
      }
    }
    double hits = 0.0;
    for (int n = 0; n < N; ++n) {
      const double spot_budget =
          share * scenario.spot_beams[n].spectral_efficiency * tau_s;
      hits += fill_cdn(sol, scenario, catalog, demand, n, broadcast,
                       spot_budget, kNoTarget)
                  .hits;
    }
    sol.feeding_time_s = tau_s;
    result.sweep.push_back({rho, hits});
    if (hits > best_hits) {
      best_hits = hits;
      result.best = sol;
      result.best_split = rho;
    }
  }
  return result;
}

}  // namespace satcache
