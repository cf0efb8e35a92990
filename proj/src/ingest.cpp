#include "satcache/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "satcache/rng.hpp"

namespace satcache {

namespace {

std::vector<std::string> split(const std::string& line,
                               const std::string& delim) {
  std::vector<std::string> fields;
  size_t pos = 0;
  while (true) {
    size_t next = line.find(delim, pos);
    if (next == std::string::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, next - pos));
    pos = next + delim.size();
  }
  return fields;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

bool parse_i64(const std::string& text, int64_t* out) {
  if (text.empty()) return false;
  try {
    size_t consumed = 0;
    long long v = std::stoll(text, &consumed);
    if (consumed != text.size()) return false;
    *out = v;
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

ParsedRatings parse_ratings(std::istream& ratings, std::istream* users) {
  ParsedRatings out;

  // Legacy user table: user::...::zip, the ZIP is the last field.
  std::unordered_map<std::string, std::string> user_zip;
  if (users) {
    std::string line;
    while (std::getline(*users, line)) {
      line = strip_cr(line);
      if (line.empty()) continue;
      auto fields = split(line, "::");
      if (fields.size() < 2 || fields.front().empty()) continue;
      user_zip[fields.front()] = fields.back();
    }
  }

  std::string line;
  bool first_line = true;
  while (std::getline(ratings, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;

    const bool legacy = line.find("::") != std::string::npos;
    if (first_line && !legacy && line.rfind("user_id", 0) == 0) {
      first_line = false;
      continue;  // CSV header
    }
    first_line = false;

    RatingsRecord record;
    bool ok = false;
    if (legacy) {
      // user::item::rating::timestamp
      auto fields = split(line, "::");
      int64_t ts = 0;
      if (fields.size() == 4 && !fields[0].empty() && !fields[1].empty() &&
          parse_i64(fields[3], &ts) && ts >= 0) {
        record.user_id = fields[0];
        record.item_id = fields[1];
        record.timestamp = ts;
        if (auto it = user_zip.find(record.user_id); it != user_zip.end()) {
          record.zip_code = it->second;
        } else {
          ++out.stats.users_without_zip;
        }
        ok = true;
      }
    } else {
      // user_id,item_id,timestamp,zip
      auto fields = split(line, ",");
      int64_t ts = 0;
      if (fields.size() == 4 && !fields[0].empty() && !fields[1].empty() &&
          parse_i64(fields[2], &ts) && ts >= 0) {
        record.user_id = fields[0];
        record.item_id = fields[1];
        record.timestamp = ts;
        record.zip_code = fields[3];
        ok = true;
      }
    }

    if (ok) {
      ++out.stats.well_formed;
      out.records.push_back(std::move(record));
    } else {
      ++out.stats.malformed;
    }
  }

  if (out.records.empty()) {
    throw Error(Errc::EmptyCorpus, "no well-formed ratings in input");
  }
  return out;
}

void GeoIndex::load_zip_table(std::istream& in) {
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    if (first && line.rfind("zip", 0) == 0) {
      first = false;
      continue;
    }
    first = false;
    auto fields = split(line, ",");
    if (fields.size() != 3) {
      throw Error(Errc::UnreadableSource, "malformed geo row: " + line);
    }
    try {
      zip_to_latlon[fields[0]] = {std::stod(fields[1]), std::stod(fields[2])};
    } catch (const std::exception&) {
      throw Error(Errc::UnreadableSource, "malformed geo row: " + line);
    }
  }
}

double great_circle_km(double lat1, double lon1, double lat2, double lon2) {
  constexpr double kEarthRadiusKm = 6371.0088;
  constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
  const double phi1 = lat1 * kDegToRad;
  const double phi2 = lat2 * kDegToRad;
  const double dphi = (lat2 - lat1) * kDegToRad;
  const double dlambda = (lon2 - lon1) * kDegToRad;
  const double a = std::sin(dphi / 2) * std::sin(dphi / 2) +
                   std::cos(phi1) * std::cos(phi2) * std::sin(dlambda / 2) *
                       std::sin(dlambda / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

BeamAssignment assign_to_beam(const std::string& zip, const GeoIndex& geo) {
  auto it = geo.zip_to_latlon.find(zip);
  if (it == geo.zip_to_latlon.end()) {
    return {BeamAssignment::Kind::UnknownZip, -1};
  }
  const auto [lat, lon] = it->second;

  int best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (int b = 0; b < static_cast<int>(geo.beam_footprints.size()); ++b) {
    const Footprint& fp = geo.beam_footprints[b];
    double dist = great_circle_km(lat, lon, fp.center_lat, fp.center_lon);
    if (dist <= fp.radius_km && dist < best_dist) {
      best = b;
      best_dist = dist;
    }
  }
  if (best < 0) return {BeamAssignment::Kind::OutsideCoverage, -1};
  return {BeamAssignment::Kind::Beam, best};
}

DemandBuildResult build_demand(const std::vector<RatingsRecord>& records,
                               const GeoIndex& geo,
                               const ContentCatalog& universe,
                               const DemandFilter& filter) {
  if (records.empty()) {
    throw Error(Errc::EmptyCorpus, "no ratings records to build demand from");
  }
  const int n_beams = static_cast<int>(geo.beam_footprints.size());
  if (n_beams < 1) {
    throw Error(Errc::InvalidArgument, "geo index has no beam footprints");
  }

  std::unordered_map<std::string, int> universe_index;
  for (int f = 0; f < universe.size(); ++f) {
    universe_index[universe.ids[f]] = f;
  }

  DemandBuildResult result;
  result.parsed_requests = static_cast<int64_t>(records.size());

  // In-coverage request count per universe item, and the per-(beam,item)
  // tallies we need once the selection is known.
  std::vector<int64_t> item_counts(universe.size(), 0);
  std::unordered_map<int64_t, int64_t> beam_item_counts;  // key beam*F + item

  for (const auto& record : records) {
    BeamAssignment where = assign_to_beam(record.zip_code, geo);
    if (where.kind == BeamAssignment::Kind::UnknownZip) {
      ++result.unknown_zip;
      continue;
    }
    if (where.kind == BeamAssignment::Kind::OutsideCoverage) {
      ++result.outside_coverage;
      continue;
    }
    auto it = universe_index.find(record.item_id);
    if (it == universe_index.end()) continue;  // not in the size universe
    ++item_counts[it->second];
    ++beam_item_counts[static_cast<int64_t>(where.beam) * universe.size() +
                       it->second];
  }

  std::vector<int> qualifying;
  for (int f = 0; f < universe.size(); ++f) {
    if (item_counts[f] >= filter.min_ratings) qualifying.push_back(f);
  }
  if (static_cast<int>(qualifying.size()) < filter.top_k) {
    throw Error(Errc::InsufficientItems,
                std::to_string(qualifying.size()) + " items have >= " +
                    std::to_string(filter.min_ratings) +
                    " in-coverage ratings, need " +
                    std::to_string(filter.top_k));
  }

  Rng rng(filter.seed);
  std::vector<int> selected =
      rng.sample(qualifying, static_cast<size_t>(filter.top_k));
  std::sort(selected.begin(), selected.end());  // keep universe order

  result.catalog.ids.reserve(selected.size());
  result.catalog.sizes_bits.reserve(selected.size());
  for (int f : selected) {
    result.catalog.ids.push_back(universe.ids[f]);
    result.catalog.sizes_bits.push_back(universe.sizes_bits[f]);
  }

  result.demand = DemandMatrix(n_beams, static_cast<int>(selected.size()));
  for (int out_f = 0; out_f < static_cast<int>(selected.size()); ++out_f) {
    for (int b = 0; b < n_beams; ++b) {
      auto it = beam_item_counts.find(
          static_cast<int64_t>(b) * universe.size() + selected[out_f]);
      if (it != beam_item_counts.end()) {
        result.demand.at(b, out_f) = static_cast<double>(it->second);
        result.counted_requests += it->second;
      }
    }
  }
  result.dropped_requests = result.parsed_requests - result.counted_requests;
  return result;
}

void write_demand_csv(std::ostream& out, const DemandMatrix& demand,
                      const NetworkScenario& scenario,
                      const ContentCatalog& catalog) {
  out << "cdn_id,item_id,count\n";
  for (int n = 0; n < demand.num_cdns(); ++n) {
    for (int f = 0; f < demand.num_items(); ++f) {
      if (demand.at(n, f) == 0.0) continue;
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", demand.at(n, f));
      out << scenario.spot_beams[n].beam_id << ',' << catalog.ids[f] << ','
          << buf << '\n';
    }
  }
}

DemandMatrix read_demand_csv(std::istream& in, const NetworkScenario& scenario,
                             const ContentCatalog& catalog) {
  std::unordered_map<std::string, int> cdn_index;
  for (int n = 0; n < scenario.num_cdns(); ++n) {
    cdn_index[scenario.spot_beams[n].beam_id] = n;
  }
  std::unordered_map<std::string, int> item_index;
  for (int f = 0; f < catalog.size(); ++f) item_index[catalog.ids[f]] = f;

  DemandMatrix demand(scenario.num_cdns(), catalog.size());
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    if (first && line.rfind("cdn_id", 0) == 0) {
      first = false;
      continue;
    }
    first = false;
    auto fields = split(line, ",");
    if (fields.size() != 3) {
      throw Error(Errc::UnreadableSource, "malformed demand row: " + line);
    }
    auto cdn = cdn_index.find(fields[0]);
    if (cdn == cdn_index.end()) {
      throw Error(Errc::DimensionMismatch,
                  "demand row references unknown cdn '" + fields[0] + "'");
    }
    auto item = item_index.find(fields[1]);
    if (item == item_index.end()) {
      throw Error(Errc::DimensionMismatch,
                  "demand row references unknown item '" + fields[1] + "'");
    }
    double count = 0.0;
    try {
      count = std::stod(fields[2]);
    } catch (const std::exception&) {
      throw Error(Errc::UnreadableSource, "malformed demand count: " + line);
    }
    if (count < 0.0) {
      throw Error(Errc::NonPositiveQuantity,
                  "negative demand count: " + line);
    }
    demand.at(cdn->second, item->second) += count;
  }
  return demand;
}

}  // namespace satcache
