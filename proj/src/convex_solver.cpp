// Primal-dual interior-point solver for the project's convex programs
// (linear objective, linear + convex diagonal-quadratic constraints, box
// bounds). Infeasible start, so no feasibility phase is needed.
//
// Every inequality (constraints and finite bounds alike) is written as
// f_i(z) + s_i = 0 with s_i, lambda_i > 0. Each Newton step eliminates
// (ds, dlambda) and solves
//     (sum_i lambda_i Hess f_i + J^T diag(lambda/s) J) dz = rhs,
// which this problem family keeps cheap: rows touching at most two
// variables (bounds, pairwise couplings like x_n <= x) partition the
// variables into small independent blocks found by union-find, while the
// few wide rows (budgets, cache totals, hit targets, convexified
// throughput) enter through a Woodbury low-rank update. Directions are
// polished by iterative refinement when the active-set weights get stiff.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <ostream>
#include <sstream>

#include "satcache/subproblem.hpp"

namespace satcache {

double ConvexProgram::Constraint::value(std::span<const double> z) const {
  double v = constant;
  for (const Term& t : linear) v += t.coeff * z[t.var];
  for (const Term& t : quadratic) v += t.coeff * z[t.var] * z[t.var];
  return v;
}

void ConvexProgram::Constraint::add_gradient(std::span<const double> z,
                                             double scale,
                                             std::span<double> grad) const {
  for (const Term& t : linear) grad[t.var] += scale * t.coeff;
  for (const Term& t : quadratic) {
    grad[t.var] += scale * 2.0 * t.coeff * z[t.var];
  }
}

int ConvexProgram::add_var(const std::string& name, double lo, double hi) {
  var_names.push_back(name);
  lower.push_back(lo);
  upper.push_back(hi);
  objective.push_back(0.0);
  return num_vars++;
}

ConvexProgram::Constraint& ConvexProgram::add_constraint(
    const std::string& name) {
  constraints.emplace_back();
  constraints.back().name = name;
  return constraints.back();
}

bool ConvexProgram::well_formed(std::string* why) const {
  auto fail = [&](const std::string& reason) {
    if (why) *why = reason;
    return false;
  };
  if (static_cast<int>(lower.size()) != num_vars ||
      static_cast<int>(upper.size()) != num_vars ||
      static_cast<int>(objective.size()) != num_vars) {
    return fail("variable arrays out of sync");
  }
  for (const auto& con : constraints) {
    for (const auto& t : con.linear) {
      if (t.var < 0 || t.var >= num_vars) {
        return fail("constraint '" + con.name + "' references unknown variable");
      }
    }
    for (const auto& t : con.quadratic) {
      if (t.var < 0 || t.var >= num_vars) {
        return fail("constraint '" + con.name + "' references unknown variable");
      }
      if (t.coeff < 0.0) {
        return fail("constraint '" + con.name + "' has a concave quadratic term");
      }
    }
  }
  return true;
}

const char* solve_status_name(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::IterationLimit: return "IterationLimit";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Reduced problem after eliminating fixed variables, with every inequality
// (original constraints and finite bounds) in one uniform row list.
struct Prepared {
  int n = 0;                  // reduced variable count
  std::vector<int> to_orig;   // reduced -> original
  std::vector<double> fixed;  // per-original fixed value
  std::vector<char> is_fixed;
  std::vector<double> c;  // reduced objective
  double c0 = 0.0;

  struct Row {
    std::vector<ConvexProgram::Term> lin;
    std::vector<ConvexProgram::Term> quad;
    double constant = 0.0;
    std::vector<int> grad_vars;  // sorted, deduplicated support
    bool dense = false;          // support wider than two variables
  };
  std::vector<Row> rows;
  std::vector<int> dense_ids;

  std::vector<std::vector<int>> block_vars;
  std::vector<int> var_block;
  std::vector<int> var_pos;

  // Rough magnitude of the starting box, used to seed the iterate.
  std::vector<double> start;
};

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int a) {
    while (parent_[a] != a) a = parent_[a] = parent_[parent_[a]];
    return a;
  }
  void merge(int a, int b) { parent_[find(a)] = find(b); }

 private:
  std::vector<int> parent_;
};

bool prepare(const ConvexProgram& program, Prepared& prep,
             SolverResult& early) {
  const int n_orig = program.num_vars;
  prep.is_fixed.assign(n_orig, 0);
  prep.fixed.assign(n_orig, 0.0);

  std::vector<int> to_red(n_orig, -1);
  for (int j = 0; j < n_orig; ++j) {
    double lo = program.lower[j], hi = program.upper[j];
    if (lo > hi + 1e-12) {
      early.status = SolveStatus::Infeasible;
      early.message = "variable '" + program.var_names[j] + "' has lo > hi";
      return false;
    }
    if (std::isfinite(lo) && std::isfinite(hi) && hi - lo <= 1e-12) {
      prep.is_fixed[j] = 1;
      prep.fixed[j] = 0.5 * (lo + hi);
    } else {
      to_red[j] = prep.n++;
      prep.to_orig.push_back(j);
      prep.c.push_back(program.objective[j]);
      double start = 0.0;
      if (std::isfinite(lo) && std::isfinite(hi)) {
        start = 0.5 * (lo + hi);
      } else if (std::isfinite(lo)) {
        start = lo + 1.0;
      } else if (std::isfinite(hi)) {
        start = hi - 1.0;
      }
      prep.start.push_back(start);
    }
  }
  prep.c0 = program.objective_constant;
  for (int j = 0; j < n_orig; ++j) {
    if (prep.is_fixed[j]) prep.c0 += program.objective[j] * prep.fixed[j];
  }

  auto push_row = [&](Prepared::Row row, const std::string& name) {
    if (row.lin.empty() && row.quad.empty()) {
      if (row.constant > 1e-9) {
        early.status = SolveStatus::Infeasible;
        early.message =
            "constraint '" + name + "' is violated by fixed variables alone";
        return false;
      }
      return true;  // trivially satisfied, drop
    }
    for (const auto& t : row.lin) row.grad_vars.push_back(t.var);
    for (const auto& t : row.quad) row.grad_vars.push_back(t.var);
    std::sort(row.grad_vars.begin(), row.grad_vars.end());
    row.grad_vars.erase(
        std::unique(row.grad_vars.begin(), row.grad_vars.end()),
        row.grad_vars.end());
    row.dense = row.grad_vars.size() > 2;
    prep.rows.push_back(std::move(row));
    return true;
  };

  for (const auto& con : program.constraints) {
    Prepared::Row row;
    row.constant = con.constant;
    for (const auto& t : con.linear) {
      if (prep.is_fixed[t.var]) {
        row.constant += t.coeff * prep.fixed[t.var];
      } else if (t.coeff != 0.0) {
        row.lin.push_back({to_red[t.var], t.coeff});
      }
    }
    for (const auto& t : con.quadratic) {
      if (prep.is_fixed[t.var]) {
        row.constant += t.coeff * prep.fixed[t.var] * prep.fixed[t.var];
      } else if (t.coeff != 0.0) {
        row.quad.push_back({to_red[t.var], t.coeff});
      }
    }
    if (!push_row(std::move(row), con.name)) return false;
  }
  // Finite bounds as rows: lo - z <= 0 and z - hi <= 0.
  for (int j = 0; j < n_orig; ++j) {
    if (prep.is_fixed[j]) continue;
    int r = to_red[j];
    if (std::isfinite(program.lower[j])) {
      Prepared::Row row;
      row.lin.push_back({r, -1.0});
      row.constant = program.lower[j];
      if (!push_row(std::move(row), "lb")) return false;
    }
    if (std::isfinite(program.upper[j])) {
      Prepared::Row row;
      row.lin.push_back({r, 1.0});
      row.constant = -program.upper[j];
      if (!push_row(std::move(row), "ub")) return false;
    }
  }

  UnionFind uf(prep.n);
  for (const auto& row : prep.rows) {
    if (!row.dense && row.grad_vars.size() == 2) {
      uf.merge(row.grad_vars[0], row.grad_vars[1]);
    }
  }
  std::vector<int> root_block(prep.n, -1);
  prep.var_block.assign(prep.n, -1);
  prep.var_pos.assign(prep.n, -1);
  for (int v = 0; v < prep.n; ++v) {
    int r = uf.find(v);
    if (root_block[r] < 0) {
      root_block[r] = static_cast<int>(prep.block_vars.size());
      prep.block_vars.emplace_back();
    }
    prep.var_block[v] = root_block[r];
    prep.var_pos[v] = static_cast<int>(prep.block_vars[root_block[r]].size());
    prep.block_vars[root_block[r]].push_back(v);
  }
  for (int i = 0; i < static_cast<int>(prep.rows.size()); ++i) {
    if (prep.rows[i].dense) prep.dense_ids.push_back(i);
  }
  return true;
}

class PrimalDualSolver {
 public:
  PrimalDualSolver(const Prepared& prep, const SolverTolerances& tol)
      : p_(prep), tol_(tol), m_(static_cast<int>(prep.rows.size())) {
    const char* trace = std::getenv("SATCACHE_SOLVER_TRACE");
    trace_ = trace && *trace && *trace != '0';

    const int n = p_.n;
    z_ = p_.start;
    slack_.assign(m_, 1.0);
    dual_.assign(m_, 1.0);
    fval_.assign(m_, 0.0);
    grad_rows_.assign(m_, {});
    weight_.assign(m_, 0.0);
    r_dual_.assign(n, 0.0);
    rhs_.assign(n, 0.0);
    dz_.assign(n, 0.0);
    ds_.assign(m_, 0.0);
    dl_.assign(m_, 0.0);
    blocks_.resize(p_.block_vars.size());
    for (size_t b = 0; b < p_.block_vars.size(); ++b) {
      size_t k = p_.block_vars[b].size();
      blocks_[b].assign(k * k, 0.0);
    }
    const int md = static_cast<int>(p_.dense_ids.size());
    dense_g_.assign(md, {});
    dense_w_.assign(md, 0.0);
    ycols_.assign(md, std::vector<double>(n, 0.0));
    schur_.assign(static_cast<size_t>(md) * md, 0.0);
  }

  SolverResult run() {
    SolverResult result;
    const int n = p_.n;
    if (m_ == 0) {
      bool zero_obj = true;
      for (double cj : p_.c) zero_obj = zero_obj && cj == 0.0;
      result.status =
          zero_obj ? SolveStatus::Optimal : SolveStatus::NumericalFailure;
      result.message = zero_obj ? "unconstrained" : "program is unbounded";
      result.duality_gap = 0.0;
      result.max_violation = 0.0;
      return result;
    }

    // Infeasible start: slacks sized to the initial constraint values.
    eval_rows();
    for (int i = 0; i < m_; ++i) {
      slack_[i] = std::max(1.0, -fval_[i]);
      dual_[i] = 1.0;
    }

    double alpha_prev = 1.0;
    double best_infeas = kInf;
    int stalled = 0;

    // Best iterate seen, by a composite optimality score; degenerate duals
    // can wreck later iterations after the primal has already converged.
    std::vector<double> best_z = z_;
    double best_score = kInf, best_obj = 0.0, best_rp = kInf, best_gap = kInf;

    const int max_iters = std::max(30, tol_.max_newton);
    for (int iter = 0; iter < max_iters; ++iter) {
      eval_rows();
      build_row_gradients();

      // Residuals.
      double r_prim_inf = 0.0;
      for (int i = 0; i < m_; ++i) {
        r_prim_inf = std::max(r_prim_inf, std::abs(fval_[i] + slack_[i]));
      }
      std::fill(r_dual_.begin(), r_dual_.end(), 0.0);
      for (int j = 0; j < n; ++j) r_dual_[j] = p_.c[j];
      for (int i = 0; i < m_; ++i) {
        for (const auto& t : grad_rows_[i]) {
          r_dual_[t.var] += dual_[i] * t.coeff;
        }
      }
      double r_dual_inf = 0.0;
      for (int j = 0; j < n; ++j) {
        r_dual_inf = std::max(r_dual_inf, std::abs(r_dual_[j]));
      }
      double gap = 0.0;
      for (int i = 0; i < m_; ++i) gap += slack_[i] * dual_[i];
      const double mu = gap / m_;
      const double obj = objective();

      result.newton_iterations = iter;
      result.duality_gap = gap;
      result.max_violation = r_prim_inf;
      if (!std::isfinite(mu) || !std::isfinite(r_prim_inf) ||
          !std::isfinite(r_dual_inf) || !std::isfinite(obj)) {
        result.status = SolveStatus::NumericalFailure;
        result.message = "iterates diverged (non-finite residuals)";
        result.objective = obj + p_.c0;
        return finish(result);
      }
      if (trace_ && iter % 5 == 0) {
        std::fprintf(stderr,
                     "[solver] it %3d mu=%.3e rp=%.3e rd=%.3e obj=%.8e a=%.2f\n",
                     iter, mu, r_prim_inf, r_dual_inf, obj, alpha_prev);
      }

      const double obj_scale = 1.0 + std::abs(obj);
      double dual_max = 0.0;
      for (double l : dual_) dual_max = std::max(dual_max, l);
      const double rd_tol = 1e2 * tol_.eps_opt * obj_scale * (1.0 + dual_max);

      const double score =
          std::max({r_prim_inf / tol_.eps_feas,
                    gap / (tol_.eps_opt * obj_scale), r_dual_inf / rd_tol});
      if (score < best_score) {
        best_score = score;
        best_z = z_;
        best_obj = obj;
        best_rp = r_prim_inf;
        best_gap = gap;
      }
      if (r_prim_inf <= tol_.eps_feas && gap <= tol_.eps_opt * obj_scale &&
          r_dual_inf <= rd_tol) {
        result.status = SolveStatus::Optimal;
        result.objective = obj + p_.c0;
        return finish(result);
      }
      // Degenerate duals: the primal has converged but the dual residual
      // cannot settle. Accept the best primal iterate.
      if (dual_max > 1e10 && best_rp <= tol_.eps_feas &&
          best_gap <= 1e1 * tol_.eps_opt * obj_scale) {
        z_ = best_z;
        result.status = SolveStatus::Optimal;
        result.objective = best_obj + p_.c0;
        result.duality_gap = best_gap;
        result.max_violation = best_rp;
        result.message = "accepted best iterate under dual degeneracy";
        return finish(result);
      }

      // Infeasibility heuristics, armed only while no iterate has come
      // close to primal feasibility: complementarity settles with the
      // primal residual stuck, or the duals blow up.
      best_infeas = std::min(best_infeas, r_prim_inf);
      if (best_infeas > 1e3 * tol_.eps_feas) {
        if (mu < 1e-9 * obj_scale) ++stalled;
        if (dual_max > 1e12) ++stalled;
      } else {
        stalled = 0;
      }
      if (stalled >= 5) {
        result.status = SolveStatus::Infeasible;
        result.message = "primal residual stalled at " +
                         std::to_string(best_infeas) +
                         " with vanishing complementarity";
        result.objective = obj + p_.c0;
        return finish(result);
      }

      // Centering weight from the last step's progress.
      double sigma = alpha_prev > 0.6 ? 0.1 : (alpha_prev > 0.2 ? 0.3 : 0.7);
      if (!newton_step(sigma * mu)) {
        result.status = SolveStatus::NumericalFailure;
        result.message = "KKT solve failed: " + kkt_error_;
        result.objective = obj + p_.c0;
        return finish(result);
      }

      // Fraction-to-boundary step sizes, applied separately to the primal
      // pair (z, s) and the duals; a common step lets a blocked primal pin
      // the duals mid-flight and diverge their residual.
      const double frac = mu > 1e-6 ? 0.99 : 0.999;
      double alpha_p = 1.0, alpha_d = 1.0;
      for (int i = 0; i < m_; ++i) {
        if (ds_[i] < 0.0) alpha_p = std::min(alpha_p, -frac * slack_[i] / ds_[i]);
        if (dl_[i] < 0.0) alpha_d = std::min(alpha_d, -frac * dual_[i] / dl_[i]);
      }
      // Keep complementarity from exploding under a wild dual direction.
      for (int guard = 0; guard < 20; ++guard) {
        double mu_new = 0.0;
        for (int i = 0; i < m_; ++i) {
          mu_new += std::max(slack_[i] + alpha_p * ds_[i], 0.0) *
                    std::max(dual_[i] + alpha_d * dl_[i], 0.0);
        }
        mu_new /= m_;
        if (mu_new <= std::max(1.2 * mu, 10.0 * sigma * mu)) break;
        alpha_d *= 0.5;
      }
      for (int j = 0; j < n; ++j) z_[j] += alpha_p * dz_[j];
      for (int i = 0; i < m_; ++i) {
        slack_[i] = std::max(slack_[i] + alpha_p * ds_[i], 1e-300);
        dual_[i] = std::max(dual_[i] + alpha_d * dl_[i], 1e-300);
      }
      alpha_prev = std::min(alpha_p, alpha_d);
    }

    z_ = best_z;  // hand back the best iterate, not wherever we stopped
    result.max_violation = best_rp;
    result.duality_gap = best_gap;
    result.objective = best_obj + p_.c0;
    result.status = SolveStatus::IterationLimit;
    result.message = "iteration limit reached";
    return finish(result);
  }

  const std::vector<double>& point() const { return z_; }

 private:
  double objective() const {
    double v = 0.0;
    for (int j = 0; j < p_.n; ++j) v += p_.c[j] * z_[j];
    return v;
  }

  SolverResult finish(SolverResult result) {
    if (trace_) {
      std::fprintf(stderr, "[solver] exit %s iters=%d gap=%.3e viol=%.3e %s\n",
                   solve_status_name(result.status), result.newton_iterations,
                   result.duality_gap, result.max_violation,
                   result.message.c_str());
    }
    return result;
  }

  void eval_rows() {
    for (int i = 0; i < m_; ++i) {
      const auto& row = p_.rows[i];
      double v = row.constant;
      for (const auto& t : row.lin) v += t.coeff * z_[t.var];
      for (const auto& t : row.quad) v += t.coeff * z_[t.var] * z_[t.var];
      fval_[i] = v;
    }
  }

  void build_row_gradients() {
    for (int i = 0; i < m_; ++i) {
      const auto& row = p_.rows[i];
      auto& g = grad_rows_[i];
      g.clear();
      local_.assign(row.grad_vars.size(), 0.0);
      auto idx_of = [&](int var) {
        return static_cast<size_t>(
            std::lower_bound(row.grad_vars.begin(), row.grad_vars.end(), var) -
            row.grad_vars.begin());
      };
      for (const auto& t : row.lin) local_[idx_of(t.var)] += t.coeff;
      for (const auto& t : row.quad) {
        local_[idx_of(t.var)] += 2.0 * t.coeff * z_[t.var];
      }
      for (size_t a = 0; a < row.grad_vars.size(); ++a) {
        g.push_back({row.grad_vars[a], local_[a]});
      }
    }
  }

  // One predictor-free centering step toward s.l = target_mu.
  bool newton_step(double target_mu) {
    const int n = p_.n;

    // Eliminating ds = -r_p - J dz and dl = (mu - s l - l ds)/s from the
    // linearized KKT system leaves
    //   M dz = -r_dual + sum_i g_i [ (s_i l_i - mu)/s_i - (l_i/s_i) r_p_i ]
    // with M = sum_i l_i Hess f_i + J^T diag(l/s) J and r_p_i = f_i + s_i.
    for (int j = 0; j < n; ++j) rhs_[j] = -r_dual_[j];
    for (int i = 0; i < m_; ++i) {
      weight_[i] = dual_[i] / slack_[i];
      const double coef =
          (slack_[i] * dual_[i] - target_mu) / slack_[i] -
          weight_[i] * (fval_[i] + slack_[i]);
      for (const auto& t : grad_rows_[i]) rhs_[t.var] += coef * t.coeff;
    }

    if (!assemble_and_factor()) return false;

    dz_ = rhs_;
    if (!structured_solve(dz_)) return false;
    refine();

    // Recover ds and dlam.
    for (int i = 0; i < m_; ++i) {
      double jdz = 0.0;
      for (const auto& t : grad_rows_[i]) jdz += t.coeff * dz_[t.var];
      ds_[i] = -(fval_[i] + slack_[i]) - jdz;
      dl_[i] = (target_mu - slack_[i] * dual_[i] - dual_[i] * ds_[i]) /
               slack_[i];
    }
    return true;
  }

  void refine() {
    // One round of iterative refinement on M dz = rhs when it helps.
    const int n = p_.n;
    std::vector<double> res(n, 0.0);
    apply_m(dz_, res);
    double rn = 0.0;
    for (int j = 0; j < n; ++j) {
      res[j] = rhs_[j] - res[j];
      rn += res[j] * res[j];
    }
    if (!(rn > 0.0)) return;
    std::vector<double> corr = res;
    if (!structured_solve(corr)) return;
    std::vector<double> cand(n);
    for (int j = 0; j < n; ++j) cand[j] = dz_[j] + corr[j];
    std::vector<double> res2(n, 0.0);
    apply_m(cand, res2);
    double rn2 = 0.0;
    for (int j = 0; j < n; ++j) {
      double r = rhs_[j] - res2[j];
      rn2 += r * r;
    }
    if (rn2 < rn) dz_ = cand;
  }

  void apply_m(const std::vector<double>& v, std::vector<double>& out) const {
    const int n = p_.n;
    out.assign(n, 0.0);
    for (size_t b = 0; b < blocks_.size(); ++b) {
      const auto& vars = p_.block_vars[b];
      const int k = static_cast<int>(vars.size());
      const auto& m = blocks_[b];
      for (int i = 0; i < k; ++i) {
        double acc = m[static_cast<size_t>(i) * k + i] * v[vars[i]];
        for (int j = i + 1; j < k; ++j) {
          const double val = m[static_cast<size_t>(i) * k + j];
          acc += val * v[vars[j]];
          out[vars[j]] += val * v[vars[i]];
        }
        out[vars[i]] += acc;
      }
    }
    const int md = static_cast<int>(p_.dense_ids.size());
    for (int k = 0; k < md; ++k) {
      double dot = 0.0;
      for (const auto& t : dense_g_[k]) dot += t.coeff * v[t.var];
      const double scale = dense_w_[k] * dot;
      for (const auto& t : dense_g_[k]) out[t.var] += scale * t.coeff;
    }
  }

  bool assemble_and_factor() {
    for (auto& mat : blocks_) std::fill(mat.begin(), mat.end(), 0.0);

    int dense_slot = 0;
    for (int i = 0; i < m_; ++i) {
      const auto& row = p_.rows[i];
      const double w = weight_[i];
      // Curvature of the row itself (diagonal).
      for (const auto& t : row.quad) {
        diag_add(t.var, dual_[i] * 2.0 * t.coeff);
      }
      if (!row.dense) {
        const auto& g = grad_rows_[i];
        for (size_t a = 0; a < g.size(); ++a) {
          for (size_t b = a; b < g.size(); ++b) {
            block_add(g[a].var, g[b].var, w * g[a].coeff * g[b].coeff);
          }
        }
      } else {
        // Unit-norm rows keep the Schur complement balanced.
        const auto& g = grad_rows_[i];
        double norm2 = 0.0;
        for (const auto& t : g) norm2 += t.coeff * t.coeff;
        const double norm = std::sqrt(std::max(norm2, 1e-300));
        auto& dst = dense_g_[dense_slot];
        dst.clear();
        for (const auto& t : g) dst.push_back({t.var, t.coeff / norm});
        dense_w_[dense_slot] = w * norm2;
        ++dense_slot;
      }
    }

    if (!factor_blocks()) {
      kkt_error_ = "block factorization failed";
      return false;
    }
    const int md = static_cast<int>(p_.dense_ids.size());
    for (int k = 0; k < md; ++k) {
      auto& y = ycols_[k];
      std::fill(y.begin(), y.end(), 0.0);
      for (const auto& t : dense_g_[k]) y[t.var] = t.coeff;
      solve_blocks(y);
    }
    std::fill(schur_.begin(), schur_.end(), 0.0);
    for (int k = 0; k < md; ++k) {
      schur_[static_cast<size_t>(k) * md + k] = 1.0 / dense_w_[k];
      for (int l = k; l < md; ++l) {
        double dot = 0.0;
        for (const auto& t : dense_g_[k]) dot += t.coeff * ycols_[l][t.var];
        schur_[static_cast<size_t>(k) * md + l] += dot;
        if (l != k) {
          schur_[static_cast<size_t>(l) * md + k] =
              schur_[static_cast<size_t>(k) * md + l];
        }
      }
    }
    if (md > 0 && !chol_small(schur_, md, schur_chol_)) {
      kkt_error_ = "Schur factorization failed";
      return false;
    }
    return true;
  }

  void diag_add(int var, double value) {
    int b = p_.var_block[var];
    int k = static_cast<int>(p_.block_vars[b].size());
    int pos = p_.var_pos[var];
    blocks_[b][static_cast<size_t>(pos) * k + pos] += value;
  }

  void block_add(int var_a, int var_b, double value) {
    int b = p_.var_block[var_a];
    int k = static_cast<int>(p_.block_vars[b].size());
    int pa = p_.var_pos[var_a], pb = p_.var_pos[var_b];
    if (pa > pb) std::swap(pa, pb);
    blocks_[b][static_cast<size_t>(pa) * k + pb] += value;
  }

  bool factor_blocks() {
    chol_ = blocks_;
    for (size_t b = 0; b < chol_.size(); ++b) {
      const int k = static_cast<int>(p_.block_vars[b].size());
      auto& m = chol_[b];
      double ridge = 0.0;
      for (int attempt = 0; attempt < 4; ++attempt) {
        if (attempt > 0) {
          m = blocks_[b];
          double max_diag = 1e-30;
          for (int i = 0; i < k; ++i) {
            max_diag = std::max(max_diag, m[static_cast<size_t>(i) * k + i]);
          }
          ridge = (ridge == 0.0 ? 1e-12 : ridge * 1e3) * max_diag;
          for (int i = 0; i < k; ++i) {
            m[static_cast<size_t>(i) * k + i] += ridge;
          }
        }
        if (chol_inplace(m, k)) break;
        if (attempt == 3) return false;
      }
    }
    return true;
  }

  static bool chol_inplace(std::vector<double>& m, int k) {
    for (int i = 0; i < k; ++i) {
      double d = m[static_cast<size_t>(i) * k + i];
      for (int r = 0; r < i; ++r) {
        const double v = m[static_cast<size_t>(r) * k + i];
        d -= v * v;
      }
      if (d <= 0.0) return false;
      d = std::sqrt(d);
      m[static_cast<size_t>(i) * k + i] = d;
      for (int j = i + 1; j < k; ++j) {
        double v = m[static_cast<size_t>(i) * k + j];
        for (int r = 0; r < i; ++r) {
          v -= m[static_cast<size_t>(r) * k + i] *
               m[static_cast<size_t>(r) * k + j];
        }
        m[static_cast<size_t>(i) * k + j] = v / d;
      }
    }
    return true;
  }

  void solve_blocks(std::vector<double>& x) const {
    for (size_t b = 0; b < chol_.size(); ++b) {
      const auto& vars = p_.block_vars[b];
      const int k = static_cast<int>(vars.size());
      const auto& m = chol_[b];
      scratch_.resize(k);
      for (int i = 0; i < k; ++i) scratch_[i] = x[vars[i]];
      for (int i = 0; i < k; ++i) {
        double v = scratch_[i];
        for (int r = 0; r < i; ++r) {
          v -= m[static_cast<size_t>(r) * k + i] * scratch_[r];
        }
        scratch_[i] = v / m[static_cast<size_t>(i) * k + i];
      }
      for (int i = k - 1; i >= 0; --i) {
        double v = scratch_[i];
        for (int r = i + 1; r < k; ++r) {
          v -= m[static_cast<size_t>(i) * k + r] * scratch_[r];
        }
        scratch_[i] = v / m[static_cast<size_t>(i) * k + i];
      }
      for (int i = 0; i < k; ++i) x[vars[i]] = scratch_[i];
    }
  }

  bool structured_solve(std::vector<double>& rhs) const {
    solve_blocks(rhs);
    const int md = static_cast<int>(p_.dense_ids.size());
    if (md == 0) return true;
    small_.resize(md);
    for (int k = 0; k < md; ++k) {
      double dot = 0.0;
      for (const auto& t : dense_g_[k]) dot += t.coeff * rhs[t.var];
      small_[k] = dot;
    }
    if (!chol_solve_small(schur_chol_, small_)) return false;
    for (int k = 0; k < md; ++k) {
      const double mu = small_[k];
      if (mu == 0.0) continue;
      const auto& y = ycols_[k];
      for (int j = 0; j < p_.n; ++j) rhs[j] -= mu * y[j];
    }
    return true;
  }

  static bool chol_small(const std::vector<double>& mat, int k,
                         std::vector<double>& out) {
    out = mat;
    return chol_inplace(out, k);
  }

  static bool chol_solve_small(const std::vector<double>& chol,
                               std::vector<double>& x) {
    const int k = static_cast<int>(x.size());
    if (static_cast<int>(chol.size()) != k * k) return false;
    for (int i = 0; i < k; ++i) {
      double v = x[i];
      for (int r = 0; r < i; ++r) {
        v -= chol[static_cast<size_t>(r) * k + i] * x[r];
      }
      x[i] = v / chol[static_cast<size_t>(i) * k + i];
    }
    for (int i = k - 1; i >= 0; --i) {
      double v = x[i];
      for (int r = i + 1; r < k; ++r) {
        v -= chol[static_cast<size_t>(i) * k + r] * x[r];
      }
      x[i] = v / chol[static_cast<size_t>(i) * k + i];
    }
    return true;
  }

  const Prepared& p_;
  SolverTolerances tol_;
  const int m_;
  bool trace_ = false;
  std::string kkt_error_;

  std::vector<double> z_, slack_, dual_, fval_, weight_;
  std::vector<std::vector<ConvexProgram::Term>> grad_rows_;
  std::vector<double> r_dual_, rhs_, dz_, ds_, dl_;
  std::vector<double> local_;
  std::vector<std::vector<double>> blocks_, chol_;
  std::vector<std::vector<ConvexProgram::Term>> dense_g_;
  std::vector<double> dense_w_;
  std::vector<std::vector<double>> ycols_;
  std::vector<double> schur_, schur_chol_;
  mutable std::vector<double> scratch_, small_;
};

}  // namespace

SolverResult solve_convex(const ConvexProgram& program,
                          const SolverTolerances& tol) {
  SolverResult result;
  std::string why;
  if (!program.well_formed(&why)) {
    result.status = SolveStatus::NumericalFailure;
    result.message = "malformed program: " + why;
    return result;
  }

  Prepared prep;
  if (!prepare(program, prep, result)) {
    result.primal.assign(program.num_vars, 0.0);
    for (int j = 0; j < program.num_vars; ++j) {
      if (prep.is_fixed[j]) result.primal[j] = prep.fixed[j];
    }
    return result;
  }

  auto expand = [&](const std::vector<double>& reduced) {
    std::vector<double> full(program.num_vars, 0.0);
    for (int j = 0; j < program.num_vars; ++j) {
      if (prep.is_fixed[j]) full[j] = prep.fixed[j];
    }
    for (int r = 0; r < prep.n; ++r) full[prep.to_orig[r]] = reduced[r];
    return full;
  };

  if (prep.n == 0) {
    result.status = SolveStatus::Optimal;
    result.primal = expand({});
    result.objective = prep.c0;
    result.duality_gap = 0.0;
    result.max_violation = 0.0;
    for (const auto& con : program.constraints) {
      result.max_violation =
          std::max(result.max_violation, con.value(result.primal));
    }
    return result;
  }

  PrimalDualSolver solver(prep, tol);
  result = solver.run();
  result.primal = expand(solver.point());

  double worst = 0.0;
  for (const auto& con : program.constraints) {
    worst = std::max(worst, con.value(result.primal));
  }
  for (int j = 0; j < program.num_vars; ++j) {
    if (std::isfinite(program.lower[j])) {
      worst = std::max(worst, program.lower[j] - result.primal[j]);
    }
    if (std::isfinite(program.upper[j])) {
      worst = std::max(worst, result.primal[j] - program.upper[j]);
    }
  }
  result.max_violation = worst;
  result.objective = program.objective_constant;
  for (int j = 0; j < program.num_vars; ++j) {
    result.objective += program.objective[j] * result.primal[j];
  }
  return result;
}

void ConvexProgram::dump_lp(std::ostream& out) const {
  auto term_name = [&](int var) {
    return var_names.empty() ? "z" + std::to_string(var) : var_names[var];
  };
  out << "\\ satcache convex program dump\nMinimize\n obj:";
  for (int j = 0; j < num_vars; ++j) {
    if (objective[j] != 0.0) {
      out << (objective[j] >= 0 ? " + " : " - ") << std::abs(objective[j])
          << " " << term_name(j);
    }
  }
  out << "\nSubject To\n";
  for (const auto& con : constraints) {
    out << " " << con.name << ":";
    for (const auto& t : con.linear) {
      out << (t.coeff >= 0 ? " + " : " - ") << std::abs(t.coeff) << " "
          << term_name(t.var);
    }
    if (!con.quadratic.empty()) {
      out << " + [";
      bool first = true;
      for (const auto& t : con.quadratic) {
        out << (first ? " " : " + ") << t.coeff << " " << term_name(t.var)
            << " ^2";
        first = false;
      }
      out << " ]";
    }
    out << " <= " << -con.constant << "\n";
  }
  out << "Bounds\n";
  for (int j = 0; j < num_vars; ++j) {
    out << " ";
    if (std::isfinite(lower[j])) out << lower[j] << " <= ";
    else out << "-inf <= ";
    out << term_name(j);
    if (std::isfinite(upper[j])) out << " <= " << upper[j];
    out << "\n";
  }
  out << "End\n";
}

}  // namespace satcache
