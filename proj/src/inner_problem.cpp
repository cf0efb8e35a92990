// Construction of the convex inner problem around an anchor point. The
// bilinear capacity w*gamma*tau >= load is rewritten through
// w*tau = ((w+tau)^2 - w^2 - tau^2)/2 and the concave square is replaced by
// its tangent at the anchor, giving the convex inner approximation
//   2*load/gamma + w^2 + tau^2 <= 2(w+tau)(wb+taub) - (wb+taub)^2.
#include <algorithm>
#include <cmath>

#include "satcache/subproblem.hpp"

namespace satcache {

Scaling Scaling::from(const NetworkScenario& scenario,
                      const ContentCatalog& catalog,
                      const DemandMatrix& demand) {
  Scaling s;
  s.size_bits = 1.0;
  for (double q : catalog.sizes_bits) s.size_bits = std::max(s.size_bits, q);
  s.bandwidth_hz = scenario.total_bandwidth_hz;
  s.efficiency = scenario.wide_beam.spectral_efficiency;
  for (const auto& beam : scenario.spot_beams) {
    s.efficiency = std::min(s.efficiency, beam.spectral_efficiency);
  }
  s.catalog_bits = std::max(catalog.total_bits(), s.size_bits);
  s.time_s = s.catalog_bits / (s.bandwidth_hz * s.efficiency);
  s.demand = 1.0;
  for (int n = 0; n < demand.num_cdns(); ++n) {
    s.demand = std::max(s.demand, demand.cdn_total(n));
  }
  return s;
}

JointSolution InnerProblem::extract(std::span<const double> primal) const {
  const int F = layout.num_items;
  const int N = layout.num_cdns;
  JointSolution sol = JointSolution::zeros(N, F);
  auto clip01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
  for (int f = 0; f < F; ++f) {
    sol.wide_broadcast[f] = clip01(primal[layout.x(f)]);
  }
  for (int n = 0; n < N; ++n) {
    for (int f = 0; f < F; ++f) {
      sol.stored(n, f) = clip01(primal[layout.stored(n, f)]);
      sol.spot(n, f) = clip01(primal[layout.spot(n, f)]);
    }
  }
  for (int k = 0; k <= N; ++k) {
    sol.bandwidth_hz[k] =
        std::max(0.0, primal[layout.bandwidth(k)]) * scaling.bandwidth_hz;
  }
  sol.feeding_time_s = std::max(0.0, primal[layout.tau()]) * scaling.time_s;
  return sol;
}

InnerProblem build_inner_problem(const NetworkScenario& scenario,
                                 const ContentCatalog& catalog,
                                 const DemandMatrix& demand,
                                 const InnerAnchor& anchor,
                                 const InnerOptions& options) {
  const int F = catalog.size();
  const int N = scenario.num_cdns();

  if (static_cast<int>(anchor.bandwidth_hz.size()) != N + 1) {
    throw Error(Errc::DimensionMismatch, "anchor needs N+1 bandwidth entries");
  }
  for (double w : anchor.bandwidth_hz) {
    if (!(w > 0.0)) {
      throw Error(Errc::InvalidAnchor, "anchor bandwidth must be positive");
    }
  }
  if (!(anchor.tau_s > 0.0)) {
    throw Error(Errc::InvalidAnchor, "anchor tau must be positive");
  }
  if (options.objective == InnerObjective::MaximizeHitsFixedTau &&
      !(options.fixed_tau_s > 0.0)) {
    throw Error(Errc::InvalidArgument, "fixed tau must be positive");
  }

  InnerProblem inner;
  inner.scaling = Scaling::from(scenario, catalog, demand);
  inner.layout.num_items = F;
  inner.layout.num_cdns = N;
  inner.layout.num_colors = scenario.num_colors();
  const Scaling& sc = inner.scaling;

  // Normalized data. Cache rows use sizes in max-file units; capacity rows
  // use catalog-total units so loads, bandwidth, and tau all stay O(1).
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
  const double tau_bar = anchor.tau_s / sc.time_s;
  std::vector<double> w_bar(N + 1);
  for (int k = 0; k <= N; ++k) {
    w_bar[k] = anchor.bandwidth_hz[k] / sc.bandwidth_hz;
  }

  ConvexProgram& prog = inner.program;
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
  {
    double tau_lo = 0.0, tau_hi = ConvexProgram::kInf;
    if (options.objective == InnerObjective::MaximizeHitsFixedTau) {
      tau_lo = tau_hi = options.fixed_tau_s / sc.time_s;
    } else {
      tau_hi = options.tau_cap_factor * tau_bar;
    }
    prog.add_var("tau", tau_lo, tau_hi);
  }
  for (int c = 0; c < inner.layout.num_colors; ++c) {
    prog.add_var("band[" + std::to_string(c) + "]", 0.0, 1.0);
  }
  const VarLayout& L = inner.layout;

  // Objective.
  if (options.objective == InnerObjective::MinimizeTau) {
    prog.objective[L.tau()] = 1.0;
  } else {
    for (int n = 0; n < N; ++n) {
      for (int f = 0; f < F; ++f) {
        double l = demand.at(n, f) / sc.demand;
        prog.objective[L.stored(n, f)] -= l;
        prog.objective[L.spot(n, f)] -= l;
      }
    }
  }
  if (options.penalty && options.penalty->weight > 0.0) {
    // DC penalty: v(1-v) linearized at the previous iterate has slope 1-2v;
    // subtracting it from the maximized objective adds weight*(1-2v)*v to a
    // minimization (constants dropped).
    const PenaltyState& pen = *options.penalty;
    if (static_cast<int>(pen.prev_x.size()) != F ||
        static_cast<int>(pen.prev_stored.size()) != N * F ||
        static_cast<int>(pen.prev_spot.size()) != N * F) {
      throw Error(Errc::DimensionMismatch, "penalty state has wrong shape");
    }
    for (int f = 0; f < F; ++f) {
      prog.objective[L.x(f)] += pen.weight * (1.0 - 2.0 * pen.prev_x[f]);
    }
    for (int n = 0; n < N; ++n) {
      for (int f = 0; f < F; ++f) {
        prog.objective[L.stored(n, f)] +=
            pen.weight * (1.0 - 2.0 * pen.prev_stored[n * F + f]);
        prog.objective[L.spot(n, f)] +=
            pen.weight * (1.0 - 2.0 * pen.prev_spot[n * F + f]);
      }
    }
  }

  // Convexified throughput: one constraint for the wide beam, one per spot.
  auto add_capacity = [&](int beam_k, const std::string& name,
                          auto&& load_terms) {
    auto& con = prog.add_constraint(name);
    load_terms(con);
    const double kappa = w_bar[beam_k] + tau_bar;
    con.quadratic.push_back({L.bandwidth(beam_k), 1.0});
    con.quadratic.push_back({L.tau(), 1.0});
    con.linear.push_back({L.bandwidth(beam_k), -2.0 * kappa});
    con.linear.push_back({L.tau(), -2.0 * kappa});
    con.constant += kappa * kappa;
  };
  add_capacity(0, "wide_capacity", [&](ConvexProgram::Constraint& con) {
    for (int f = 0; f < F; ++f) {
      con.linear.push_back({L.x(f), 2.0 * q_cap[f] / gamma[0]});
    }
  });
  for (int n = 0; n < N; ++n) {
    add_capacity(n + 1, "spot_capacity[" + std::to_string(n) + "]",
                 [&](ConvexProgram::Constraint& con) {
                   for (int f = 0; f < F; ++f) {
                     con.linear.push_back(
                         {L.spot(n, f), 2.0 * q_cap[f] / gamma[n + 1]});
                   }
                 });
  }

  // Hit targets.
  for (int n = 0; n < N; ++n) {
    auto& con = prog.add_constraint("min_hits[" + std::to_string(n) + "]");
    for (int f = 0; f < F; ++f) {
      double l = demand.at(n, f) / sc.demand;
      if (l > 0.0) {
        con.linear.push_back({L.stored(n, f), -l});
        con.linear.push_back({L.spot(n, f), -l});
      }
    }
    con.constant = scenario.hit_targets[n] / sc.demand;
  }

  // Cache capacity.
  for (int n = 0; n < N; ++n) {
    auto& con = prog.add_constraint("cache[" + std::to_string(n) + "]");
    for (int f = 0; f < F; ++f) {
      con.linear.push_back({L.stored(n, f), q[f]});
      con.linear.push_back({L.spot(n, f), q[f]});
    }
    con.constant = -scenario.cache_size_bits[n] / sc.size_bits;
  }

  // Exclusive delivery and broadcast-store linkage.
  for (int n = 0; n < N; ++n) {
    for (int f = 0; f < F; ++f) {
      auto& excl = prog.add_constraint("excl[" + std::to_string(n) + "," +
                                       std::to_string(f) + "]");
      excl.linear.push_back({L.stored(n, f), 1.0});
      excl.linear.push_back({L.spot(n, f), 1.0});
      excl.constant = -1.0;

      auto& link = prog.add_constraint("link[" + std::to_string(n) + "," +
                                       std::to_string(f) + "]");
      link.linear.push_back({L.stored(n, f), 1.0});
      link.linear.push_back({L.x(f), -1.0});
    }
  }

  // Bandwidth budget (normalized W_tot = 1).
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

  return inner;
}

}  // namespace satcache
