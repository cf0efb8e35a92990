// Ratings corpus -> per-CDN demand vectors. Users are geolocated through
// their ZIP code and attributed to the spot beam (one per CDN) whose circular
// footprint contains them; requests outside every footprint are dropped.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "satcache/model.hpp"

namespace satcache {

struct RatingsRecord {
  std::string user_id;
  std::string item_id;
  int64_t timestamp = 0;
  std::string zip_code;
};

struct ParseStats {
  int64_t well_formed = 0;
  int64_t malformed = 0;
  int64_t users_without_zip = 0;  // legacy layout only
};

struct ParsedRatings {
  std::vector<RatingsRecord> records;
  ParseStats stats;
};

// Flattened layout: CSV user_id,item_id,timestamp,zip (header optional).
// Legacy layout: ratings lines user::item::rating::timestamp plus a user
// table user::...::zip supplying the ZIP codes (pass it as `users`).
// Malformed lines are counted, not fatal; an input yielding zero records
// throws EmptyCorpus.
ParsedRatings parse_ratings(std::istream& ratings,
                            std::istream* users = nullptr);

struct Footprint {
  double center_lat = 0.0;
  double center_lon = 0.0;
  double radius_km = 0.0;
};

struct GeoIndex {
  std::map<std::string, std::pair<double, double>> zip_to_latlon;
  std::vector<Footprint> beam_footprints;  // index n = CDN n's spot beam
  std::optional<Footprint> wide_footprint;

  // CSV rows zip,lat,lon (header optional).
  void load_zip_table(std::istream& in);
};

double great_circle_km(double lat1, double lon1, double lat2, double lon2);

struct BeamAssignment {
  enum class Kind { Beam, OutsideCoverage, UnknownZip };
  Kind kind = Kind::OutsideCoverage;
  int beam = -1;
};

// Spot beam whose footprint contains the ZIP's location; overlaps resolved
// toward the nearest center, remaining ties toward the lower beam index.
BeamAssignment assign_to_beam(const std::string& zip, const GeoIndex& geo);

struct DemandFilter {
  int64_t min_ratings = 100;  // minimum in-coverage requests per item
  int top_k = 100;            // items sampled from the qualifying set
  uint64_t seed = 1;
};

struct DemandBuildResult {
  DemandMatrix demand;
  ContentCatalog catalog;  // the selected sub-catalog, demand columns aligned
  int64_t parsed_requests = 0;
  int64_t counted_requests = 0;   // attributed to a CDN and a selected item
  int64_t dropped_requests = 0;   // outside coverage, unknown zip, or item not selected
  int64_t outside_coverage = 0;
  int64_t unknown_zip = 0;
};

// Filters items to those with >= min_ratings in-coverage requests, samples
// top_k of them with a seeded generator, and counts requests per CDN. The
// input catalog provides sizes for every item id that may be selected; items
// absent from it are ignored (counted as dropped).
DemandBuildResult build_demand(const std::vector<RatingsRecord>& records,
                               const GeoIndex& geo,
                               const ContentCatalog& universe,
                               const DemandFilter& filter);

// Demand CSV interchange: header cdn_id,item_id,count.
void write_demand_csv(std::ostream& out, const DemandMatrix& demand,
                      const NetworkScenario& scenario,
                      const ContentCatalog& catalog);
DemandMatrix read_demand_csv(std::istream& in, const NetworkScenario& scenario,
                             const ContentCatalog& catalog);

}  // namespace satcache
