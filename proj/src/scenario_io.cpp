#include "satcache/scenario_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "satcache/rng.hpp"

namespace satcache {

namespace {

using nlohmann::json;

constexpr double kBitsPerGB = 8e9;

double require_positive(const json& node, const char* what) {
  double v = node.get<double>();
  if (!(v > 0.0)) {
    throw Error(Errc::NonPositiveQuantity,
                std::string(what) + " must be positive");
  }
  return v;
}

Footprint parse_footprint(const json& node) {
  Footprint fp;
  fp.center_lat = node.at("lat").get<double>();
  fp.center_lon = node.at("lon").get<double>();
  fp.radius_km = require_positive(node.at("radius_km"), "footprint radius");
  return fp;
}

BeamLink parse_beam(const json& node, const EfficiencyMap& map,
                    const std::string& fallback_id) {
  BeamLink beam;
  beam.beam_id = node.value("id", fallback_id);
  if (node.contains("color")) beam.color = node.at("color").get<int>();
  if (node.contains("snr_db")) beam.snr_db = node.at("snr_db").get<double>();
  if (node.contains("spectral_efficiency")) {
    beam.spectral_efficiency =
        require_positive(node.at("spectral_efficiency"), "spectral efficiency");
    if (beam.snr_db) {
      double mapped = efficiency_from_snr(*beam.snr_db, map);
      if (std::abs(mapped - beam.spectral_efficiency) >
          1e-9 * std::max(1.0, mapped)) {
        throw Error(Errc::InvalidArgument,
                    "beam '" + beam.beam_id +
                        "': spectral_efficiency disagrees with snr_db under "
                        "the configured mapping");
      }
    }
  } else if (beam.snr_db) {
    beam.spectral_efficiency = efficiency_from_snr(*beam.snr_db, map);
  } else {
    throw Error(Errc::InvalidArgument,
                "beam '" + beam.beam_id +
                    "' needs snr_db or spectral_efficiency");
  }
  return beam;
}

ContentCatalog parse_catalog(const json& node) {
  ContentCatalog catalog;
  if (node.contains("generate")) {
    const json& gen = node.at("generate");
    const int count = gen.at("count").get<int>();
    if (count < 1) {
      throw Error(Errc::InvalidArgument, "catalog count must be >= 1");
    }
    const double min_gb = gen.value("min_gb", 0.5);
    const double max_gb = gen.value("max_gb", 1.0);
    const uint64_t seed = gen.value("seed", 1ULL);
    const std::string prefix = gen.value("id_prefix", std::string("item-"));
    Rng rng(seed);
    for (int f = 0; f < count; ++f) {
      catalog.ids.push_back(prefix + std::to_string(f));
      catalog.sizes_bits.push_back(rng.uniform(min_gb, max_gb) * kBitsPerGB);
    }
    return catalog;
  }
  catalog.ids = node.at("ids").get<std::vector<std::string>>();
  if (node.contains("sizes_bits")) {
    catalog.sizes_bits = node.at("sizes_bits").get<std::vector<double>>();
  } else {
    for (double gb : node.at("sizes_gb").get<std::vector<double>>()) {
      catalog.sizes_bits.push_back(gb * kBitsPerGB);
    }
  }
  return catalog;
}

}  // namespace

LoadedScenario load_scenario_json(const std::string& text,
                                  const EfficiencyMap& map,
                                  const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::UnreadableSource,
                std::string("scenario is not valid JSON: ") + e.what());
  }

  LoadedScenario loaded;
  try {
    NetworkScenario& sc = loaded.scenario;
    sc.total_bandwidth_hz =
        require_positive(doc.at("total_bandwidth_hz"), "total bandwidth");
    const std::string reuse = doc.value("reuse_mode", std::string("multicarrier"));
    if (reuse == "multicarrier") {
      sc.reuse_mode = ReuseMode::Multicarrier;
    } else if (reuse == "multispot") {
      sc.reuse_mode = ReuseMode::MultiSpotReuse;
    } else {
      throw Error(Errc::InvalidArgument,
                  "reuse_mode must be multicarrier or multispot");
    }

    sc.wide_beam = parse_beam(doc.at("wide_beam"), map, "wide");
    if (doc.at("wide_beam").contains("footprint")) {
      loaded.geo.wide_footprint =
          parse_footprint(doc.at("wide_beam").at("footprint"));
    }

    const json& spots = doc.at("spot_beams");
    int index = 0;
    for (const json& node : spots) {
      BeamLink beam = parse_beam(node, map, "cdn-" + std::to_string(index));
      sc.spot_beams.push_back(beam);
      double cache_bits = node.contains("cache_bits")
                              ? node.at("cache_bits").get<double>()
                              : node.value("cache_gb", 0.0) * kBitsPerGB;
      if (!(cache_bits > 0.0)) {
        throw Error(Errc::NonPositiveQuantity,
                    "spot beam '" + beam.beam_id +
                        "' needs a positive cache_bits or cache_gb");
      }
      sc.cache_size_bits.push_back(cache_bits);
      sc.hit_targets.push_back(node.value("hit_target", 0.0));
      if (node.contains("footprint")) {
        loaded.geo.beam_footprints.push_back(
            parse_footprint(node.at("footprint")));
      }
      ++index;
    }
    if (!loaded.geo.beam_footprints.empty() &&
        loaded.geo.beam_footprints.size() != sc.spot_beams.size()) {
      throw Error(Errc::DimensionMismatch,
                  "either every spot beam carries a footprint or none does");
    }

    loaded.catalog = parse_catalog(doc.at("catalog"));

    if (doc.contains("demand")) {
      const json& demand = doc.at("demand");
      if (demand.contains("inline")) {
        const auto rows =
            demand.at("inline").get<std::vector<std::vector<double>>>();
        DemandMatrix matrix(static_cast<int>(rows.size()),
                            loaded.catalog.size());
        if (static_cast<int>(rows.size()) != sc.num_cdns()) {
          throw Error(Errc::DimensionMismatch,
                      "inline demand needs one row per CDN");
        }
        for (int n = 0; n < matrix.num_cdns(); ++n) {
          if (static_cast<int>(rows[n].size()) != loaded.catalog.size()) {
            throw Error(Errc::DimensionMismatch,
                        "inline demand row " + std::to_string(n) +
                            " length mismatch");
          }
          for (int f = 0; f < matrix.num_items(); ++f) {
            matrix.at(n, f) = rows[n][f];
          }
        }
        loaded.demand = std::move(matrix);
      } else if (demand.contains("csv")) {
        std::filesystem::path path = demand.at("csv").get<std::string>();
        if (path.is_relative() && !base_dir.empty()) {
          path = std::filesystem::path(base_dir) / path;
        }
        loaded.demand_csv = path.string();
      } else {
        throw Error(Errc::InvalidArgument,
                    "demand needs either 'inline' rows or a 'csv' path");
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::UnreadableSource,
                std::string("scenario document: ") + e.what());
  }
  return loaded;
}

LoadedScenario load_scenario_file(const std::string& path,
                                  const EfficiencyMap& map) {
  std::ifstream in(path);
  if (!in) {
    throw Error(Errc::UnreadableSource, "cannot open scenario file " + path);
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_scenario_json(buffer.str(), map,
                            std::filesystem::path(path).parent_path().string());
}

}  // namespace satcache
