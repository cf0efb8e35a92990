// Seeded synthetic instances shaped like the evaluation setup: a handful of
// CDNs under one wide beam, a Zipf-like global popularity with per-CDN
// locality, file sizes uniform in a band, and SNRs sampled inside the
// coverage ranges. Used by the acceptance harness and handy for quick CLI
// experiments without a ratings corpus.
#pragma once

#include <cstdint>

#include "satcache/model.hpp"

namespace satcache {

struct SynthSpec {
  int num_cdns = 9;
  int num_items = 100;
  uint64_t seed = 1;

  double zipf_exponent = 1.1;
  double locality = 0.95;           // weight of the per-CDN popularity shuffle
  double requests_per_cdn = 12000;  // before per-CDN volume jitter
  double volume_spread = 35.0;      // ratio between the largest and smallest CDN
  int64_t min_item_requests = 100;  // enforced by scaling up if needed

  double min_size_gb = 0.5;
  double max_size_gb = 1.0;
  double cache_gb = 30.0;
  double total_bandwidth_hz = 6.5e8;

  double wide_snr_lo_db = 4.08, wide_snr_hi_db = 9.22;
  double spot_snr_lo_db = 2.48, spot_snr_hi_db = 9.33;

  int num_colors = 0;  // > 0 switches the scenario to multi-spot reuse
};

struct SynthInstance {
  NetworkScenario scenario;
  ContentCatalog catalog;
  DemandMatrix demand;
};

SynthInstance make_synthetic_instance(const SynthSpec& spec);

}  // namespace satcache
