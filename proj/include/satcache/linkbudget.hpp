// SNR -> spectral efficiency mapping. The link budget itself (power flux
// density, antenna patterns) is out of scope: per-location SNR is an input,
// and constant power spectral density keeps it independent of the bandwidth
// split.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "satcache/model.hpp"

namespace satcache {

struct ModcodEntry {
  double min_snr_db = 0.0;
  double efficiency = 0.0;  // bits/s/Hz
};

class EfficiencyMap {
 public:
  // Shannon mode: efficiency = log2(1 + 10^(snr/10)).
  static EfficiencyMap shannon();
  // Step-function lookup over MODCOD thresholds. Entries must be strictly
  // increasing in both snr and efficiency.
  static EfficiencyMap modcod_table(std::vector<ModcodEntry> entries);
  // CSV with header min_snr_db,efficiency.
  static EfficiencyMap from_csv(std::istream& in);

  bool is_shannon() const { return entries_.empty(); }
  const std::vector<ModcodEntry>& entries() const { return entries_; }

 private:
  std::vector<ModcodEntry> entries_;  // empty = Shannon
};

// Shannon: defined for any finite snr. Tabular: efficiency of the largest
// threshold <= snr_db; throws BelowMinimumModcod below the first threshold
// (an unservable location).
double efficiency_from_snr(double snr_db, const EfficiencyMap& map);

inline double shannon_efficiency(double snr_db) {
  return efficiency_from_snr(snr_db, EfficiencyMap::shannon());
}

// Advisory plausibility screen over all beams of a scenario.
struct SnrFlag {
  std::string beam_id;
  double snr_db = 0.0;
  bool wide = false;
};

struct SnrRangeReport {
  std::vector<SnrFlag> flagged;
  int beams_checked = 0;
  bool clean() const { return flagged.empty(); }
};

SnrRangeReport snr_range_check(const NetworkScenario& scenario,
                               double window_lo_db = -5.0,
                               double window_hi_db = 25.0);

}  // namespace satcache
