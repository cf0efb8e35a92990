// The convex inner problem machinery: a small program container for linear +
// convex diagonal-quadratic constraints, the interior-point solver behind the
// solve_convex contract, and the builder that convexifies the bilinear
// throughput constraints around an anchor point.
#pragma once

#include <cmath>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "satcache/model.hpp"

namespace satcache {

// ---------------------------------------------------------------------------
// Program container
// ---------------------------------------------------------------------------

// minimize  objective . z  (+ objective_constant)
// s.t.      f_i(z) = sum_k quad_k z_k^2 + sum_j lin_j z_j + constant <= 0
//           lower <= z <= upper
// Quadratic coefficients must be non-negative (diagonal PSD), which is all
// this problem family needs: the convexified throughput constraints are
// w^2 + tau^2 plus affine terms.
struct ConvexProgram {
  struct Term {
    int var = 0;
    double coeff = 0.0;
  };
  struct Constraint {
    std::string name;
    std::vector<Term> linear;
    std::vector<Term> quadratic;
    double constant = 0.0;

    double value(std::span<const double> z) const;
    // dense gradient accumulation: grad += scale * df/dz
    void add_gradient(std::span<const double> z, double scale,
                      std::span<double> grad) const;
  };

  int num_vars = 0;
  std::vector<std::string> var_names;
  std::vector<double> lower, upper;
  std::vector<double> objective;
  double objective_constant = 0.0;
  std::vector<Constraint> constraints;

  int add_var(const std::string& name, double lo, double hi);
  Constraint& add_constraint(const std::string& name);
  // Index validity + quadratic convexity; returns false with a reason.
  bool well_formed(std::string* why = nullptr) const;
  // CPLEX-LP-style text dump (quadratic terms in [] blocks), for debugging.
  void dump_lp(std::ostream& out) const;

  static constexpr double kInf = std::numeric_limits<double>::infinity();
};

// ---------------------------------------------------------------------------
// Solver
// ---------------------------------------------------------------------------

enum class SolveStatus { Optimal, Infeasible, IterationLimit, NumericalFailure };

const char* solve_status_name(SolveStatus status);

struct SolverTolerances {
  double eps_opt = 1e-6;   // relative complementarity-gap target
  double eps_feas = 1e-7;  // absolute feasibility margin on normalized data
  int max_newton = 300;    // interior-point iteration budget
};

struct SolverResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  std::vector<double> primal;  // always populated with the last iterate
  double objective = std::numeric_limits<double>::quiet_NaN();
  double duality_gap = std::numeric_limits<double>::infinity();
  double max_violation = std::numeric_limits<double>::infinity();
  int newton_iterations = 0;
  std::string message;
};

// Infeasible-start primal-dual interior-point method. The Newton systems
// exploit the problem's structure: two-variable coupling constraints and
// bounds form small independent blocks, the few dense rows (budgets, cache
// totals, hit targets, convexified throughput) enter through a low-rank
// update. Quadratic constraints are handled exactly, never re-linearized.
SolverResult solve_convex(const ConvexProgram& program,
                          const SolverTolerances& tol = {});

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

// Raw units (bits, Hz) span nine orders of magnitude; every program is built
// on data rescaled so W_tot = 1, max file size = 1, efficiencies >= 1, and
// tau is measured in units of the full-catalog transfer time at the worst
// efficiency, which keeps bandwidth and time variables the same order of
// magnitude inside the convexified constraints.
struct Scaling {
  double size_bits = 1.0;     // = max q
  double bandwidth_hz = 1.0;  // = W_tot
  double efficiency = 1.0;    // = min gamma over all beams
  double catalog_bits = 1.0;  // = sum q
  double time_s = 1.0;        // = catalog_bits / (bandwidth_hz * efficiency)
  double demand = 1.0;        // = max over CDNs of total requests

  static Scaling from(const NetworkScenario& scenario,
                      const ContentCatalog& catalog,
                      const DemandMatrix& demand);
};

// ---------------------------------------------------------------------------
// Inner problem builder
// ---------------------------------------------------------------------------

// Variable layout of the relaxed joint problem: x (F), x_n (N*F), y_n (N*F)
// in [0,1]; w (N+1) >= 0; tau >= 0; one sub-band width per reuse color.
struct VarLayout {
  int num_items = 0;
  int num_cdns = 0;
  int num_colors = 0;

  int x(int f) const { return f; }
  int stored(int n, int f) const { return num_items * (1 + n) + f; }
  int spot(int n, int f) const {
    return num_items * (1 + num_cdns + n) + f;
  }
  int bandwidth(int k) const {  // k in [0, N]
    return num_items * (1 + 2 * num_cdns) + k;
  }
  int tau() const { return bandwidth(num_cdns) + 1; }
  int color_band(int c) const { return tau() + 1 + c; }
  int total() const { return tau() + 1 + num_colors; }
};

struct InnerAnchor {
  std::vector<double> bandwidth_hz;  // N+1 entries, strictly positive
  double tau_s = 0.0;                // strictly positive
};

enum class InnerObjective { MinimizeTau, MaximizeHitsFixedTau };

// DC penalty pushing the relaxed caching variables toward {0,1}: subtracts
// weight * sum v(1-v), linearized at the previous iterate, from the
// maximized objective.
struct PenaltyState {
  double weight = 0.0;
  std::vector<double> prev_x, prev_stored, prev_spot;
};

struct InnerOptions {
  InnerObjective objective = InnerObjective::MinimizeTau;
  double fixed_tau_s = 0.0;  // MaximizeHitsFixedTau only
  std::optional<PenaltyState> penalty;
  // tau upper bound as a multiple of the anchor tau (keeps phase I bounded;
  // the optimum is below the anchor whenever the anchor is feasible).
  double tau_cap_factor = 4.0;
};

struct InnerProblem {
  ConvexProgram program;  // in normalized units
  VarLayout layout;
  Scaling scaling;

  // Translate a solver point back to raw units (clips caching vars to [0,1]).
  JointSolution extract(std::span<const double> primal) const;
};

// Emits the convex inner problem: convexified throughput constraints tangent
// at the anchor for the wide beam and every spot beam, the linear hit-target,
// cache, exclusivity, broadcast-link and bandwidth-budget constraints, and
// box relaxations of the binaries. Throws InvalidAnchor on a non-positive
// anchor component.
InnerProblem build_inner_problem(const NetworkScenario& scenario,
                                 const ContentCatalog& catalog,
                                 const DemandMatrix& demand,
                                 const InnerAnchor& anchor,
                                 const InnerOptions& options);

}  // namespace satcache
