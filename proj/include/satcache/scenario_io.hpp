// Scenario file loading. The scenario is a JSON document holding the beam
// links (SNR or spectral efficiency), per-CDN caches and targets, the total
// bandwidth, reuse coloring, footprints for demand attribution, the content
// catalog (explicit or generated), and the demand matrix (inline or a CSV
// path resolved relative to the scenario file).
#pragma once

#include <optional>
#include <string>

#include "satcache/ingest.hpp"
#include "satcache/linkbudget.hpp"
#include "satcache/model.hpp"

namespace satcache {

struct LoadedScenario {
  NetworkScenario scenario;
  ContentCatalog catalog;
  std::optional<DemandMatrix> demand;  // empty when only a CSV path is given
  std::string demand_csv;              // resolved path, when referenced
  GeoIndex geo;                        // footprints only; zips load separately
};

// Parses a scenario document. Beam efficiencies are filled from snr_db
// through the given map when not stated explicitly; when both are present
// they must agree. Throws UnreadableSource / InvalidArgument on malformed
// input.
LoadedScenario load_scenario_json(const std::string& text,
                                  const EfficiencyMap& map,
                                  const std::string& base_dir = "");

LoadedScenario load_scenario_file(const std::string& path,
                                  const EfficiencyMap& map);

}  // namespace satcache
