#include "satcache/linkbudget.hpp"

#include <cmath>
#include <istream>
#include <sstream>

namespace satcache {

EfficiencyMap EfficiencyMap::shannon() { return EfficiencyMap{}; }

EfficiencyMap EfficiencyMap::modcod_table(std::vector<ModcodEntry> entries) {
  if (entries.empty()) {
    throw Error(Errc::InvalidArgument, "modcod table needs at least one entry");
  }
  for (size_t i = 1; i < entries.size(); ++i) {
    if (!(entries[i].min_snr_db > entries[i - 1].min_snr_db) ||
        !(entries[i].efficiency > entries[i - 1].efficiency)) {
      throw Error(Errc::InvalidArgument,
                  "modcod entries must be strictly increasing in both snr and "
                  "efficiency");
    }
  }
  for (const auto& e : entries) {
    if (!(e.efficiency > 0.0)) {
      throw Error(Errc::NonPositiveQuantity,
                  "modcod efficiency must be positive");
    }
  }
  EfficiencyMap map;
  map.entries_ = std::move(entries);
  return map;
}

EfficiencyMap EfficiencyMap::from_csv(std::istream& in) {
  std::vector<ModcodEntry> entries;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first && line.find("min_snr_db") != std::string::npos) {
      first = false;
      continue;
    }
    first = false;
    std::istringstream fields(line);
    std::string snr_text, eff_text;
    if (!std::getline(fields, snr_text, ',') ||
        !std::getline(fields, eff_text, ',')) {
      throw Error(Errc::UnreadableSource, "malformed modcod row: " + line);
    }
    try {
      entries.push_back({std::stod(snr_text), std::stod(eff_text)});
    } catch (const std::exception&) {
      throw Error(Errc::UnreadableSource, "malformed modcod row: " + line);
    }
  }
  return modcod_table(std::move(entries));
}

double efficiency_from_snr(double snr_db, const EfficiencyMap& map) {
  if (map.is_shannon()) {
    return std::log2(1.0 + std::pow(10.0, snr_db / 10.0));
  }
  const auto& entries = map.entries();
  if (snr_db < entries.front().min_snr_db) {
    throw Error(Errc::BelowMinimumModcod,
                "snr " + std::to_string(snr_db) +
                    " dB is below the first modcod threshold " +
                    std::to_string(entries.front().min_snr_db) + " dB");
  }
  double efficiency = entries.front().efficiency;
  for (const auto& entry : entries) {
    if (entry.min_snr_db <= snr_db) efficiency = entry.efficiency;
  }
  return efficiency;
}

SnrRangeReport snr_range_check(const NetworkScenario& scenario,
                               double window_lo_db, double window_hi_db) {
  SnrRangeReport report;
  auto check = [&](const BeamLink& beam, bool wide) {
    if (!beam.snr_db) return;
    ++report.beams_checked;
    if (*beam.snr_db < window_lo_db || *beam.snr_db > window_hi_db) {
      report.flagged.push_back({beam.beam_id, *beam.snr_db, wide});
    }
  };
  check(scenario.wide_beam, true);
  for (const auto& beam : scenario.spot_beams) check(beam, false);
  return report;
}

}  // namespace satcache
