// Cache-feeding-time minimization: an outer loop of convex inner problems,
// each tangent to the bilinear capacity constraints at the previous
// solution, followed by binary recovery and a closed-form bandwidth
// re-allocation for the recovered placement.
#pragma once

#include <iosfwd>
#include <vector>

#include "satcache/model.hpp"
#include "satcache/subproblem.hpp"

namespace satcache {

enum class RecoveryPolicy {
  Round,          // threshold at 0.5, then repair cache and hit targets
  PenaltyDriven,  // grow a DC penalty across iterations, then round
};

struct ScaConfig {
  double convergence_eps = 1e-4;  // on the normalized feeding time
  int max_iters = 50;
  RecoveryPolicy recovery = RecoveryPolicy::Round;
  double round_threshold = 0.5;
  double anchor_margin = 1.1;       // inflation of the greedy initial tau
  double penalty_initial = 1e-3;    // of the initial objective scale
  double penalty_growth = 10.0;
  double binarity_tol = 1e-3;       // stop growing the penalty below this gap
  SolverTolerances solver;
};

struct ScaIterate {
  double tau_s = 0.0;
  std::vector<double> bandwidth_hz;
  double binarity_gap = 0.0;
  SolveStatus status = SolveStatus::Optimal;
};

struct ScaTrace {
  std::vector<ScaIterate> iterations;
  bool converged = false;
};

struct FeedTimeResult {
  JointSolution solution;  // binary, with re-optimized bandwidth and tau
  ScaTrace trace;
};

// Algorithm: start from a feasible anchor (uniform bandwidth split, greedy
// broadcast feeding time with margin), repeatedly solve the convex inner
// problem to get (tau*, w*) and re-anchor at it until |tau* - tau_old| <=
// eps or the iteration cap, then recover binaries and re-inflate tau
// minimally for the recovered placement. Throws InfeasibleTargets when some
// eta_n exceeds what CDN n's cache can reach even fractionally.
FeedTimeResult minimize_feeding_time(const NetworkScenario& scenario,
                                     const ContentCatalog& catalog,
                                     const DemandMatrix& demand,
                                     const ScaConfig& config = {});

struct RecoveryOptions {
  double threshold = 0.5;
};

// Rounds a relaxed solution and repairs it: caching exclusivity and the
// broadcast-store link hold by construction, cache overruns evict the
// lowest-density items, missed hit targets add the highest-density unserved
// items through the spot path while capacity allows. Ties break toward the
// lower item index. Throws InfeasibleAfterRounding when a target cannot be
// repaired. Bandwidth and tau are left untouched.
JointSolution recover_binaries(const JointSolution& relaxed,
                               const NetworkScenario& scenario,
                               const ContentCatalog& catalog,
                               const DemandMatrix& demand,
                               const RecoveryOptions& options = {});

void write_trace_csv(std::ostream& out, const ScaTrace& trace);

}  // namespace satcache
