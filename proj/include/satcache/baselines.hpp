// Reference delivery schemes, all under the same total bandwidth as the
// joint design: multibeam-only multicast, widebeam-only broadcast, and a
// fixed-split hybrid swept over its split ratio.
#pragma once

#include <vector>

#include "satcache/model.hpp"

namespace satcache {

enum class BaselineObjective {
  MaximizeHitsAtTau,      // fill caches within a fixed feeding window
  MinimizeTimeToTargets,  // grow the fill until every hit target is met
};

// Multibeam multicast: no broadcast, spot beams share the bandwidth equally
// (w_n = W_tot / N), each CDN fills its cache greedily by hit density.
// Time objective: the feeding time is set by the slowest CDN. Throws
// InfeasibleTargets when a target is out of greedy reach.
JointSolution reference1_multibeam(const NetworkScenario& scenario,
                                   const ContentCatalog& catalog,
                                   const DemandMatrix& demand,
                                   BaselineObjective objective,
                                   double tau_s = 0.0);

// Widebeam broadcast: w_0 = W_tot, the broadcast set grows by global hit
// density, every CDN stores from it by local density within its cache.
JointSolution reference2_widebeam(const NetworkScenario& scenario,
                                  const ContentCatalog& catalog,
                                  const DemandMatrix& demand,
                                  BaselineObjective objective,
                                  double tau_s = 0.0);

struct HybridResult {
  JointSolution best;
  double best_split = 0.0;                         // broadcast share of W_tot
  std::vector<std::pair<double, double>> sweep;    // (split, hits)
};

// Hybrid split: a fraction rho of the bandwidth broadcasts the globally
// popular files, the rest multicasts locally popular ones with an equal
// per-CDN share. Hits objective only; the split grid defaults to
// {0, 0.1, ..., 1} and the best point is returned.
HybridResult reference3_hybrid(const NetworkScenario& scenario,
                               const ContentCatalog& catalog,
                               const DemandMatrix& demand, double tau_s,
                               const std::vector<double>& split_grid = {});

}  // namespace satcache
