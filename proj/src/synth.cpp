#include "satcache/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "satcache/linkbudget.hpp"
#include "satcache/rng.hpp"

namespace satcache {

SynthInstance make_synthetic_instance(const SynthSpec& spec) {
  if (spec.num_cdns < 1 || spec.num_items < 1) {
    throw Error(Errc::InvalidArgument, "synthetic instance needs N,F >= 1");
  }
  Rng rng(spec.seed);
  SynthInstance inst;

  // Links. The wide beam must close at every location, so it gets the low
  // end of its sampled range.
  NetworkScenario& sc = inst.scenario;
  sc.total_bandwidth_hz = spec.total_bandwidth_hz;
  double wide_snr = spec.wide_snr_hi_db;
  for (int n = 0; n < spec.num_cdns; ++n) {
    wide_snr = std::min(
        wide_snr, rng.uniform(spec.wide_snr_lo_db, spec.wide_snr_hi_db));
  }
  sc.wide_beam.beam_id = "wide";
  sc.wide_beam.snr_db = wide_snr;
  sc.wide_beam.spectral_efficiency = shannon_efficiency(wide_snr);
  for (int n = 0; n < spec.num_cdns; ++n) {
    BeamLink beam;
    beam.beam_id = "cdn-" + std::to_string(n);
    beam.snr_db = rng.uniform(spec.spot_snr_lo_db, spec.spot_snr_hi_db);
    beam.spectral_efficiency = shannon_efficiency(*beam.snr_db);
    if (spec.num_colors > 0) beam.color = n % spec.num_colors;
    sc.spot_beams.push_back(beam);
  }
  sc.reuse_mode = spec.num_colors > 0 ? ReuseMode::MultiSpotReuse
                                      : ReuseMode::Multicarrier;
  sc.cache_size_bits.assign(spec.num_cdns, spec.cache_gb * 8e9);
  sc.hit_targets.assign(spec.num_cdns, 0.0);

  // Catalog.
  for (int f = 0; f < spec.num_items; ++f) {
    inst.catalog.ids.push_back("item-" + std::to_string(f));
    inst.catalog.sizes_bits.push_back(
        rng.uniform(spec.min_size_gb, spec.max_size_gb) * 8e9);
  }

  // Demand: a Zipf-like global law blended per CDN with a reshuffled copy
  // of itself, so local rankings differ while the global head stays strong.
  std::vector<double> global_weight(spec.num_items);
  for (int f = 0; f < spec.num_items; ++f) {
    global_weight[f] = 1.0 / std::pow(f + 1.0, spec.zipf_exponent);
  }
  inst.demand = DemandMatrix(spec.num_cdns, spec.num_items);
  for (int n = 0; n < spec.num_cdns; ++n) {
    std::vector<int> shuffled(spec.num_items);
    std::iota(shuffled.begin(), shuffled.end(), 0);
    rng.shuffle(shuffled);
    const double lo = 2.0 / (1.0 + spec.volume_spread);
    const double volume =
        spec.requests_per_cdn * lo *
        std::pow(spec.volume_spread, rng.uniform01());
    double mass = 0.0;
    std::vector<double> weight(spec.num_items);
    for (int f = 0; f < spec.num_items; ++f) {
      weight[f] = (1.0 - spec.locality) * global_weight[f] +
                  spec.locality * global_weight[shuffled[f]];
      mass += weight[f];
    }
    for (int f = 0; f < spec.num_items; ++f) {
      inst.demand.at(n, f) = std::floor(volume * weight[f] / mass);
    }
  }

  // Every item must clear the corpus filter the evaluation assumes.
  for (int f = 0; f < spec.num_items; ++f) {
    double total = inst.demand.item_total(f);
    if (total < spec.min_item_requests) {
      double deficit = spec.min_item_requests - total;
      double per_cdn = std::ceil(deficit / spec.num_cdns);
      for (int n = 0; n < spec.num_cdns; ++n) {
        inst.demand.at(n, f) += per_cdn;
      }
    }
  }
  return inst;
}

}  // namespace satcache
