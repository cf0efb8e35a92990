// satcache: end-to-end runner. Loads a scenario (and optionally builds the
// demand matrix from a ratings corpus), sweeps an axis over the requested
// schemes, and writes plot-ready CSV reports plus per-point placements.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "satcache/baselines.hpp"
#include "satcache/ingest.hpp"
#include "satcache/linkbudget.hpp"
#include "satcache/report.hpp"
#include "satcache/scenario_io.hpp"

namespace {

using namespace satcache;

int log_level() {
  const char* env = std::getenv("SATCACHE_LOG");
  return env && *env ? std::atoi(env) : 0;
}

// "a,b,c" or "lo..hi[..step]"; a bare range takes eight steps (nine points).
std::vector<double> parse_value_list(const std::string& text) {
  std::vector<double> values;
  if (auto range = text.find(".."); range != std::string::npos) {
    double lo = std::stod(text.substr(0, range));
    std::string rest = text.substr(range + 2);
    double hi = 0.0, step = 0.0;
    if (auto second = rest.find(".."); second != std::string::npos) {
      hi = std::stod(rest.substr(0, second));
      step = std::stod(rest.substr(second + 2));
    } else {
      hi = std::stod(rest);
      step = (hi - lo) / 8.0;
    }
    if (!(step > 0.0) || hi < lo) {
      throw Error(Errc::InvalidArgument, "bad range '" + text + "'");
    }
    for (double v = lo; v <= hi + 1e-9 * step; v += step) values.push_back(v);
    return values;
  }
  std::stringstream stream(text);
  std::string field;
  while (std::getline(stream, field, ',')) {
    if (!field.empty()) values.push_back(std::stod(field));
  }
  return values;
}

std::string sanitize(const std::string& text) {
  std::string out;
  for (char c : text) out.push_back(std::isalnum(c) ? c : '_');
  return out;
}

void write_placement(const std::filesystem::path& path, const ReportRow& row,
                     const JointSolution& sol, const NetworkScenario& scenario,
                     const ContentCatalog& catalog) {
  std::ofstream out(path);
  char head[160];
  std::snprintf(head, sizeof(head), "# scheme=%s hits=%.10g chr=%.10g tau_s=%.10g\n",
                row.scheme.c_str(), row.hits, row.chr, row.tau_s);
  out << head << "cdn_id,item_id,via\n";
  for (int n = 0; n < sol.num_cdns; ++n) {
    for (int f = 0; f < sol.num_items; ++f) {
      if (sol.stored(n, f) > 0.5) {
        out << scenario.spot_beams[n].beam_id << ',' << catalog.ids[f]
            << ",wide\n";
      } else if (sol.spot(n, f) > 0.5) {
        out << scenario.spot_beams[n].beam_id << ',' << catalog.ids[f]
            << ",spot\n";
      }
    }
  }
}

int run(int argc, char** argv) {
  CLI::App app{"joint bandwidth allocation and edge caching for flexible "
               "multibeam satellites"};
  std::string scenario_path, demand_path, sweep_arg, feeding_arg;
  std::string ratings_path, users_path, geo_path, modcod_path;
  std::string emit_demand_path, out_dir = ".";
  std::string schemes = "joint,ref1,ref2";
  std::string method = "relax";
  uint64_t seed = 1;
  double tau = 100.0;
  int64_t min_ratings = 100;
  int top_k = 100;
  bool compare_reuse = false;

  app.add_option("--scenario", scenario_path, "scenario JSON file")
      ->required();
  app.add_option("--demand", demand_path, "demand CSV (cdn_id,item_id,count)");
  app.add_option("--sweep", sweep_arg,
                 "axis=<list>, axis in {chr,cache,time}; list is a,b,c or "
                 "lo..hi[..step]");
  app.add_option("--feeding-time", feeding_arg,
                 "shorthand for --sweep time=<list>");
  app.add_option("--schemes", schemes, "subset of joint,ref1,ref2,ref3");
  app.add_option("--seed", seed, "seed for all randomized choices");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--compare-reuse", compare_reuse,
               "run the joint design under multicarrier and multi-spot "
               "spectrum configurations");
  app.add_option("--tau", tau, "feeding window in seconds for the hits axes");
  app.add_option("--method", method, "joint hits solver: bnb or relax");
  app.add_option("--ratings", ratings_path,
                 "ratings corpus (flattened CSV or legacy ::-delimited)");
  app.add_option("--users", users_path, "legacy user table carrying the ZIPs");
  app.add_option("--geo", geo_path, "zip,lat,lon table");
  app.add_option("--min-ratings", min_ratings,
                 "per-item in-coverage request threshold");
  app.add_option("--top-k", top_k, "items sampled from the qualifying set");
  app.add_option("--emit-demand", emit_demand_path,
                 "write the built demand matrix to this CSV");
  app.add_option("--modcod", modcod_path,
                 "MODCOD table CSV (min_snr_db,efficiency); default Shannon");

  CLI11_PARSE(app, argc, argv);

  EfficiencyMap map = EfficiencyMap::shannon();
  if (!modcod_path.empty()) {
    std::ifstream in(modcod_path);
    if (!in) {
      throw Error(Errc::UnreadableSource, "cannot open " + modcod_path);
    }
    map = EfficiencyMap::from_csv(in);
  }

  LoadedScenario loaded = load_scenario_file(scenario_path, map);
  NetworkScenario& scenario = loaded.scenario;
  ContentCatalog catalog = loaded.catalog;

  if (log_level() > 0) {
    auto snr_report = snr_range_check(scenario);
    for (const auto& flag : snr_report.flagged) {
      std::fprintf(stderr, "[satcache] beam %s at %.2f dB is outside the "
                           "plausibility window\n",
                   flag.beam_id.c_str(), flag.snr_db);
    }
  }

  DemandMatrix demand;
  if (!ratings_path.empty()) {
    if (geo_path.empty()) {
      throw Error(Errc::InvalidArgument, "--ratings needs --geo");
    }
    if (loaded.geo.beam_footprints.empty()) {
      throw Error(Errc::InvalidArgument,
                  "scenario carries no beam footprints for attribution");
    }
    std::ifstream geo_in(geo_path);
    if (!geo_in) {
      throw Error(Errc::UnreadableSource, "cannot open " + geo_path);
    }
    loaded.geo.load_zip_table(geo_in);
    std::ifstream ratings(ratings_path);
    if (!ratings) {
      throw Error(Errc::UnreadableSource, "cannot open " + ratings_path);
    }
    ParsedRatings parsed;
    if (!users_path.empty()) {
      std::ifstream users(users_path);
      if (!users) {
        throw Error(Errc::UnreadableSource, "cannot open " + users_path);
      }
      parsed = parse_ratings(ratings, &users);
    } else {
      parsed = parse_ratings(ratings);
    }
    DemandFilter filter{min_ratings, top_k, seed};
    auto built = build_demand(parsed.records, loaded.geo, catalog, filter);
    if (log_level() > 0) {
      std::fprintf(stderr,
                   "[satcache] %lld parsed, %lld counted, %lld dropped "
                   "(%lld outside coverage, %lld unknown zip), %lld malformed\n",
                   static_cast<long long>(built.parsed_requests),
                   static_cast<long long>(built.counted_requests),
                   static_cast<long long>(built.dropped_requests),
                   static_cast<long long>(built.outside_coverage),
                   static_cast<long long>(built.unknown_zip),
                   static_cast<long long>(parsed.stats.malformed));
    }
    catalog = built.catalog;
    demand = built.demand;
    if (!emit_demand_path.empty()) {
      std::ofstream out(emit_demand_path);
      write_demand_csv(out, demand, scenario, catalog);
    }
  } else if (!demand_path.empty()) {
    std::ifstream in(demand_path);
    if (!in) {
      throw Error(Errc::UnreadableSource,
                  "cannot open demand file " + demand_path);
    }
    demand = read_demand_csv(in, scenario, catalog);
  } else if (loaded.demand) {
    demand = *loaded.demand;
  } else if (!loaded.demand_csv.empty()) {
    std::ifstream in(loaded.demand_csv);
    if (!in) {
      throw Error(Errc::UnreadableSource,
                  "cannot open demand file " + loaded.demand_csv);
    }
    demand = read_demand_csv(in, scenario, catalog);
  } else {
    throw Error(Errc::InvalidArgument,
                "no demand: pass --demand, --ratings, or put it in the "
                "scenario");
  }

  auto validation = validate_scenario(scenario, catalog, demand);
  if (!validation.ok()) {
    throw Error(validation.issues.front().code, validation.to_string());
  }

  SweepSpec spec;
  if (!feeding_arg.empty()) {
    if (!sweep_arg.empty()) {
      throw Error(Errc::InvalidArgument,
                  "--feeding-time and --sweep are mutually exclusive");
    }
    sweep_arg = "time=" + feeding_arg;
  }
  if (sweep_arg.empty()) {
    throw Error(Errc::InvalidArgument, "a sweep is required: --sweep or "
                                       "--feeding-time");
  }
  auto eq = sweep_arg.find('=');
  std::string axis = sweep_arg.substr(0, eq);
  if (eq == std::string::npos) {
    throw Error(Errc::InvalidArgument, "--sweep needs axis=<list>");
  }
  if (axis == "chr") {
    spec.axis = SweepAxis::TargetChr;
  } else if (axis == "cache") {
    spec.axis = SweepAxis::CacheSize;
  } else if (axis == "time") {
    spec.axis = SweepAxis::FeedingTime;
  } else {
    throw Error(Errc::InvalidArgument, "unknown sweep axis '" + axis + "'");
  }
  spec.values = parse_value_list(sweep_arg.substr(eq + 1));
  spec.schemes.clear();
  std::stringstream scheme_stream(schemes);
  std::string scheme;
  while (std::getline(scheme_stream, scheme, ',')) {
    if (!scheme.empty()) spec.schemes.push_back(scheme);
  }
  spec.seed = seed;
  spec.fixed_tau_s = tau;
  spec.compare_reuse = compare_reuse;
  if (method == "bnb") {
    spec.method = HitsMethod::BranchAndBound;
  } else if (method == "relax") {
    spec.method = HitsMethod::RelaxRoundRepair;
  } else {
    throw Error(Errc::InvalidArgument, "--method must be bnb or relax");
  }

  auto outcome = run_sweep(scenario, catalog, demand, spec);

  std::filesystem::create_directories(out_dir);
  const auto base = std::filesystem::path(out_dir);
  {
    std::ofstream out(base / "report.csv");
    write_report_csv(out, outcome.rows);
  }
  {
    std::ofstream out(base / "split.csv");
    write_split_csv(out, outcome.rows);
  }
  {
    std::ofstream out(base / "summary.json");
    out << summary_json(spec, outcome.rows) << '\n';
  }
  for (size_t i = 0; i < outcome.rows.size(); ++i) {
    const auto& row = outcome.rows[i];
    char value_text[32];
    std::snprintf(value_text, sizeof(value_text), "%.6g", row.axis_value);
    auto stem = std::string(sweep_axis_name(spec.axis)) + "_" +
                sanitize(value_text) + "_" + sanitize(row.scheme);
    write_placement(base / ("solution_" + stem + ".csv"), row,
                    outcome.solutions[i], scenario, catalog);
    if (!outcome.traces[i].iterations.empty()) {
      std::ofstream trace_out(base / ("trace_" + stem + ".csv"));
      write_trace_csv(trace_out, outcome.traces[i]);
    }
  }
  if (log_level() > 0) {
    std::fprintf(stderr, "[satcache] wrote %zu rows to %s\n",
                 outcome.rows.size(), out_dir.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cout << error_json(errc_name(e.code()), e.what()) << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cout << error_json("Unhandled", e.what()) << std::endl;
    return 2;
  }
}
