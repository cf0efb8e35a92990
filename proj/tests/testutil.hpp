// Shared fixtures for the unit tests: tiny hand-built scenarios and seeded
// random instance generators.
#pragma once

#include <string>
#include <vector>

#include "satcache/model.hpp"
#include "satcache/rng.hpp"

namespace satcache::testutil {

// One wide beam + N identical spot beams, generous caches, no hit targets.
inline NetworkScenario basic_scenario(int n_cdns, double w_tot_hz = 1e8,
                                      double gamma = 2.0,
                                      double cache_bits = 1e12) {
  NetworkScenario sc;
  sc.wide_beam = {"wide", std::nullopt, gamma, std::nullopt};
  for (int n = 0; n < n_cdns; ++n) {
    sc.spot_beams.push_back(
        {"cdn-" + std::to_string(n), std::nullopt, gamma, std::nullopt});
  }
  sc.cache_size_bits.assign(n_cdns, cache_bits);
  sc.hit_targets.assign(n_cdns, 0.0);
  sc.total_bandwidth_hz = w_tot_hz;
  return sc;
}

inline ContentCatalog catalog_of(std::vector<double> sizes_bits) {
  ContentCatalog cat;
  cat.sizes_bits = std::move(sizes_bits);
  for (size_t f = 0; f < cat.sizes_bits.size(); ++f) {
    cat.ids.push_back("item-" + std::to_string(f));
  }
  return cat;
}

// Random instance small enough for brute-force oracles. Hit targets are set
// as a fraction of what a fractional cache fill can reach, so the instance
// stays feasible by construction.
struct RandomInstance {
  NetworkScenario scenario;
  ContentCatalog catalog;
  DemandMatrix demand;
};

inline RandomInstance random_instance(Rng& rng, int n_cdns, int n_items,
                                      double target_chr = 0.0) {
  RandomInstance inst;
  inst.scenario = basic_scenario(n_cdns);
  inst.scenario.total_bandwidth_hz = rng.uniform(5e7, 5e8);
  inst.scenario.wide_beam.spectral_efficiency = rng.uniform(1.5, 3.2);
  for (auto& beam : inst.scenario.spot_beams) {
    beam.spectral_efficiency = rng.uniform(1.2, 3.3);
  }
  std::vector<double> sizes(n_items);
  for (auto& q : sizes) q = rng.uniform(4e9, 8e9);  // 0.5..1 GB
  inst.catalog = catalog_of(sizes);

  inst.demand = DemandMatrix(n_cdns, n_items);
  for (int n = 0; n < n_cdns; ++n) {
    for (int f = 0; f < n_items; ++f) {
      inst.demand.at(n, f) = std::floor(rng.uniform(0.0, 200.0));
    }
  }
  for (int n = 0; n < n_cdns; ++n) {
    double total_bits = inst.catalog.total_bits();
    inst.scenario.cache_size_bits[n] =
        rng.uniform(0.3, 0.9) * total_bits;
    if (target_chr > 0.0) {
      // Cap the target by what an integral greedy fill can reach, so the
      // instance is feasible for binary placements, not just fractionally.
      std::vector<int> order(n_items);
      for (int f = 0; f < n_items; ++f) order[f] = f;
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return inst.demand.at(n, a) * inst.catalog.sizes_bits[b] >
               inst.demand.at(n, b) * inst.catalog.sizes_bits[a];
      });
      double cache_left = inst.scenario.cache_size_bits[n];
      double reachable = 0.0;
      for (int f : order) {
        if (inst.catalog.sizes_bits[f] <= cache_left) {
          cache_left -= inst.catalog.sizes_bits[f];
          reachable += inst.demand.at(n, f);
        }
      }
      inst.scenario.hit_targets[n] =
          std::min(target_chr * inst.demand.cdn_total(n), 0.9 * reachable);
    }
  }
  return inst;
}

}  // namespace satcache::testutil
