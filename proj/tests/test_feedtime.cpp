#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <sstream>

#include "satcache/feedtime.hpp"
#include "satcache/rng.hpp"
#include "testutil.hpp"

using namespace satcache;
using testutil::basic_scenario;
using testutil::catalog_of;

TEST_CASE("zero hit targets ship nothing") {
  auto scenario = basic_scenario(3);
  auto catalog = catalog_of({1e9, 2e9});
  DemandMatrix demand(3, 2);
  demand.at(0, 0) = 5;
  auto result = minimize_feeding_time(scenario, catalog, demand);
  CHECK(result.solution.feeding_time_s == 0.0);
  CHECK(result.solution.hits(demand) == 0.0);
  CHECK(result.trace.converged);
}

TEST_CASE("single file instance reaches the closed-form optimum") {
  // One CDN, one 1 Gbit file, any positive target forces the whole file;
  // all bandwidth on one path gives tau = q / (W_tot * gamma) = 5 s.
  auto scenario = basic_scenario(1, 1e8, 2.0);
  scenario.hit_targets[0] = 1.0;
  auto catalog = catalog_of({1e9});
  DemandMatrix demand(1, 1);
  demand.at(0, 0) = 10.0;

  auto start = std::chrono::steady_clock::now();
  auto result = minimize_feeding_time(scenario, catalog, demand);
  auto elapsed = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - start).count();
  CHECK(result.solution.feeding_time_s == doctest::Approx(5.0).epsilon(1e-3));
  CHECK(result.solution.hits(demand) == doctest::Approx(10.0));
  CHECK(elapsed < 5.0);

  auto report = check_feasible(result.solution, scenario, catalog, demand);
  CHECK(report.feasible);
}

TEST_CASE("unreachable targets are rejected up front") {
  auto scenario = basic_scenario(1);
  scenario.hit_targets[0] = 50.0;
  auto catalog = catalog_of({1e9});
  DemandMatrix demand(1, 1);
  demand.at(0, 0) = 10.0;
  CHECK_THROWS_AS(minimize_feeding_time(scenario, catalog, demand), Error);

  scenario.hit_targets[0] = 10.0;
  scenario.cache_size_bits[0] = 1e8;  // file no longer fits
  CHECK_THROWS_AS(minimize_feeding_time(scenario, catalog, demand), Error);
}

TEST_CASE("relaxed tau trace is non-increasing") {
  Rng rng(31);
  for (int trial = 0; trial < 8; ++trial) {
    auto inst = testutil::random_instance(rng, 3, 6, 0.4);
    auto result =
        minimize_feeding_time(inst.scenario, inst.catalog, inst.demand);
    REQUIRE(result.trace.iterations.size() >= 1);
    for (size_t i = 1; i < result.trace.iterations.size(); ++i) {
      CHECK(result.trace.iterations[i].tau_s <=
            result.trace.iterations[i - 1].tau_s +
                1e-6 * (1.0 + result.trace.iterations[i - 1].tau_s));
    }
    auto report = check_feasible(result.solution, inst.scenario, inst.catalog,
                                 inst.demand);
    CHECK(report.feasible);
  }
}

TEST_CASE("determinism: identical runs give identical traces") {
  Rng rng(77);
  auto inst = testutil::random_instance(rng, 2, 5, 0.3);
  auto a = minimize_feeding_time(inst.scenario, inst.catalog, inst.demand);
  auto b = minimize_feeding_time(inst.scenario, inst.catalog, inst.demand);
  REQUIRE(a.trace.iterations.size() == b.trace.iterations.size());
  for (size_t i = 0; i < a.trace.iterations.size(); ++i) {
    CHECK(a.trace.iterations[i].tau_s == b.trace.iterations[i].tau_s);
  }
  CHECK(a.solution.feeding_time_s == b.solution.feeding_time_s);
}

TEST_CASE("penalty-driven recovery also lands on a feasible binary point") {
  Rng rng(41);
  auto inst = testutil::random_instance(rng, 2, 5, 0.35);
  ScaConfig config;
  config.recovery = RecoveryPolicy::PenaltyDriven;
  auto result =
      minimize_feeding_time(inst.scenario, inst.catalog, inst.demand, config);
  CHECK(result.solution.binarity_gap() == 0.0);
  CHECK(check_feasible(result.solution, inst.scenario, inst.catalog,
                       inst.demand).feasible);
}

TEST_CASE("recover_binaries: already-binary feasible input is unchanged") {
  auto scenario = basic_scenario(2);
  auto catalog = catalog_of({1e9, 2e9});
  DemandMatrix demand(2, 2);
  demand.at(0, 0) = 4;
  demand.at(1, 1) = 6;
  auto sol = JointSolution::zeros(2, 2);
  sol.wide_broadcast[0] = 1.0;
  sol.stored(0, 0) = 1.0;
  sol.spot(1, 1) = 1.0;
  auto recovered = recover_binaries(sol, scenario, catalog, demand);
  CHECK(recovered.wide_broadcast == sol.wide_broadcast);
  CHECK(recovered.stored_from_wide == sol.stored_from_wide);
  CHECK(recovered.multicast == sol.multicast);
}

TEST_CASE("recover_binaries: store rounds away when the broadcast does") {
  auto scenario = basic_scenario(1);
  auto catalog = catalog_of({1e9});
  DemandMatrix demand(1, 1);
  auto sol = JointSolution::zeros(1, 1);
  sol.wide_broadcast[0] = 0.4;  // rounds to 0
  sol.stored(0, 0) = 0.6;       // would round to 1, but x = 0 forces it off
  auto recovered = recover_binaries(sol, scenario, catalog, demand);
  CHECK(recovered.wide_broadcast[0] == 0.0);
  CHECK(recovered.stored(0, 0) == 0.0);
}

TEST_CASE("recover_binaries: cache overruns evict the lowest density") {
  auto scenario = basic_scenario(1, 1e8, 2.0, 1.5e9);  // cache fits one file
  auto catalog = catalog_of({1e9, 1e9});
  DemandMatrix demand(1, 2);
  demand.at(0, 0) = 3;   // lower density, evicted
  demand.at(0, 1) = 9;
  auto sol = JointSolution::zeros(1, 2);
  sol.spot(0, 0) = 1.0;
  sol.spot(0, 1) = 1.0;
  auto recovered = recover_binaries(sol, scenario, catalog, demand);
  CHECK(recovered.spot(0, 0) == 0.0);
  CHECK(recovered.spot(0, 1) == 1.0);
}

TEST_CASE("recovered point matches brute force on a tiny instance") {
  // 1 CDN, 2 files: enumerate all consistent binary placements meeting the
  // cache and target constraints and compare achieved hits.
  auto scenario = basic_scenario(1, 1e8, 2.0, 2.1e9);
  scenario.hit_targets[0] = 8.0;
  auto catalog = catalog_of({1e9, 1.2e9});
  DemandMatrix demand(1, 2);
  demand.at(0, 0) = 5;
  demand.at(0, 1) = 8;

  auto result = minimize_feeding_time(scenario, catalog, demand);

  // Exhaustive search over all consistent binary placements for the minimal
  // feeding time that still meets the target.
  double best_tau = std::numeric_limits<double>::infinity();
  for (int x0 = 0; x0 < 2; ++x0) {
    for (int x1 = 0; x1 < 2; ++x1) {
      for (int s0 = 0; s0 <= x0; ++s0) {
        for (int s1 = 0; s1 <= x1; ++s1) {
          for (int y0 = 0; y0 + s0 <= 1; ++y0) {
            for (int y1 = 0; y1 + s1 <= 1; ++y1) {
              double cached = (s0 + y0) * 1e9 + (s1 + y1) * 1.2e9;
              if (cached > scenario.cache_size_bits[0]) continue;
              double hits = (s0 + y0) * 5.0 + (s1 + y1) * 8.0;
              if (hits < scenario.hit_targets[0]) continue;
              std::vector<double> loads = {x0 * 1e9 + x1 * 1.2e9,
                                           y0 * 1e9 + y1 * 1.2e9};
              double tau = allocate_bandwidth(scenario, loads).feeding_time_s;
              best_tau = std::min(best_tau, tau);
            }
          }
        }
      }
    }
  }
  CHECK(result.solution.hits(demand) >= scenario.hit_targets[0]);
  CHECK(result.solution.feeding_time_s ==
        doctest::Approx(best_tau).epsilon(1e-6));
}

TEST_CASE("trace csv export") {
  ScaTrace trace;
  trace.iterations.push_back({12.5, {1e7, 2e7}, 0.25, SolveStatus::Optimal});
  trace.iterations.push_back({10.0, {1e7, 2e7}, 0.0, SolveStatus::Optimal});
  std::ostringstream out;
  write_trace_csv(out, trace);
  auto text = out.str();
  CHECK(text.find("iter,tau,binarity_gap,status") != std::string::npos);
  CHECK(text.find("0,12.5,0.25,Optimal") != std::string::npos);
  CHECK(text.find("1,10,0,Optimal") != std::string::npos);
}
