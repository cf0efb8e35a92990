// Cache-hits maximization at a fixed feeding time. With tau fixed the
// throughput constraints are linear, so the problem is a mixed-binary
// linear program: solved exactly by LP-based branch and bound on small
// instances, or by one LP relaxation plus rounding, repair, and a
// hill-climb swap pass at scale.
#pragma once

#include <cstdint>
#include <iosfwd>

#include "satcache/model.hpp"
#include "satcache/subproblem.hpp"

namespace satcache {

enum class HitsMethod { BranchAndBound, RelaxRoundRepair };

struct MbipConfig {
  double fixed_tau_s = 0.0;
  HitsMethod method = HitsMethod::BranchAndBound;
  int64_t node_limit = 100000;
  double gap_tol = 1e-6;
  SolverTolerances solver;
};

struct HitsResult {
  JointSolution solution;  // binary, feeding_time_s = fixed tau
  double hits = 0.0;
  double chr = 0.0;        // hits / total requests
  double upper_bound = 0.0;
  double gap = 0.0;        // (bound - hits) / max(1, bound)
  SolveStatus status = SolveStatus::Optimal;
  int64_t nodes_explored = 0;
};

// relative optimality gap of a maximization incumbent
double bound_gap(double incumbent, double upper_bound);

HitsResult maximize_hits(const NetworkScenario& scenario,
                         const ContentCatalog& catalog,
                         const DemandMatrix& demand, const MbipConfig& config);

// Placement export: rows cdn_id,item_id,via with via in {wide, spot},
// preceded by a summary comment line with hits, CHR and the bound gap.
void write_hits_csv(std::ostream& out, const HitsResult& result,
                    const NetworkScenario& scenario,
                    const ContentCatalog& catalog);

}  // namespace satcache
