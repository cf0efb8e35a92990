#include "satcache/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace satcache {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NonPositiveQuantity: return "NonPositiveQuantity";
    case Errc::MissingColor: return "MissingColor";
    case Errc::UnreadableSource: return "UnreadableSource";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::InsufficientItems: return "InsufficientItems";
    case Errc::InvalidAnchor: return "InvalidAnchor";
    case Errc::InfeasibleTargets: return "InfeasibleTargets";
    case Errc::InfeasibleAfterRounding: return "InfeasibleAfterRounding";
    case Errc::BelowMinimumModcod: return "BelowMinimumModcod";
    case Errc::UnknownZip: return "UnknownZip";
    case Errc::NumericalFailure: return "NumericalFailure";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

double ContentCatalog::total_bits() const {
  return std::accumulate(sizes_bits.begin(), sizes_bits.end(), 0.0);
}

double DemandMatrix::cdn_total(int cdn) const {
  auto r = row(cdn);
  return std::accumulate(r.begin(), r.end(), 0.0);
}

double DemandMatrix::item_total(int item) const {
  double sum = 0.0;
  for (int n = 0; n < cdns_; ++n) sum += at(n, item);
  return sum;
}

double DemandMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), 0.0);
}

int NetworkScenario::num_colors() const {
  if (reuse_mode != ReuseMode::MultiSpotReuse) return 0;
  int max_color = -1;
  for (const auto& beam : spot_beams) {
    if (beam.color) max_color = std::max(max_color, *beam.color);
  }
  return max_color + 1;
}

JointSolution JointSolution::zeros(int num_cdns, int num_items) {
  JointSolution s;
  s.num_cdns = num_cdns;
  s.num_items = num_items;
  s.wide_broadcast.assign(num_items, 0.0);
  s.stored_from_wide.assign(static_cast<size_t>(num_cdns) * num_items, 0.0);
  s.multicast.assign(static_cast<size_t>(num_cdns) * num_items, 0.0);
  s.bandwidth_hz.assign(num_cdns + 1, 0.0);
  return s;
}

std::vector<double> JointSolution::beam_loads_bits(
    const ContentCatalog& catalog) const {
  std::vector<double> loads(num_cdns + 1, 0.0);
  for (int f = 0; f < num_items; ++f) {
    loads[0] += catalog.sizes_bits[f] * wide_broadcast[f];
  }
  for (int n = 0; n < num_cdns; ++n) {
    for (int f = 0; f < num_items; ++f) {
      loads[n + 1] += catalog.sizes_bits[f] * spot(n, f);
    }
  }
  return loads;
}

double JointSolution::hits(const DemandMatrix& demand) const {
  double total = 0.0;
  for (int n = 0; n < num_cdns; ++n) {
    for (int f = 0; f < num_items; ++f) {
      total += demand.at(n, f) * (stored(n, f) + spot(n, f));
    }
  }
  return total;
}

double JointSolution::binarity_gap() const {
  double gap = 0.0;
  auto scan = [&gap](const std::vector<double>& values) {
    for (double v : values) gap = std::max(gap, std::min(v, 1.0 - v));
  };
  scan(wide_broadcast);
  scan(stored_from_wide);
  scan(multicast);
  return gap;
}

std::string ValidationReport::to_string() const {
  std::ostringstream out;
  for (const auto& issue : issues) {
    out << errc_name(issue.code) << ": " << issue.detail << "\n";
  }
  return out.str();
}

ValidationReport validate_scenario(const NetworkScenario& scenario,
                                   const ContentCatalog& catalog,
                                   const DemandMatrix& demand) {
  ValidationReport report;
  auto add = [&report](Errc code, std::string detail) {
    report.issues.push_back({code, std::move(detail)});
  };

  const int n_cdns = scenario.num_cdns();
  const int n_items = catalog.size();

  if (n_cdns < 1) add(Errc::DimensionMismatch, "scenario needs at least one spot beam");
  if (n_items < 1) add(Errc::DimensionMismatch, "catalog needs at least one item");

  if (static_cast<int>(catalog.ids.size()) != n_items) {
    add(Errc::DimensionMismatch,
        "catalog ids length " + std::to_string(catalog.ids.size()) +
            " does not match sizes length " + std::to_string(n_items));
  } else {
    std::set<std::string> seen;
    for (int f = 0; f < n_items; ++f) {
      if (!seen.insert(catalog.ids[f]).second) {
        add(Errc::InvalidArgument, "duplicate catalog id '" + catalog.ids[f] + "'");
      }
    }
  }
  for (int f = 0; f < n_items; ++f) {
    if (!(catalog.sizes_bits[f] > 0.0)) {
      add(Errc::NonPositiveQuantity,
          "item " + std::to_string(f) + " has non-positive size");
    }
  }

  if (demand.num_cdns() != n_cdns || demand.num_items() != n_items) {
    add(Errc::DimensionMismatch,
        "demand is " + std::to_string(demand.num_cdns()) + "x" +
            std::to_string(demand.num_items()) + ", expected " +
            std::to_string(n_cdns) + "x" + std::to_string(n_items));
  } else {
    for (int n = 0; n < n_cdns; ++n) {
      for (int f = 0; f < n_items; ++f) {
        if (demand.at(n, f) < 0.0) {
          add(Errc::NonPositiveQuantity,
              "negative demand at cdn " + std::to_string(n) + ", item " +
                  std::to_string(f));
        }
      }
    }
  }

  if (static_cast<int>(scenario.cache_size_bits.size()) != n_cdns) {
    add(Errc::DimensionMismatch,
        "cache_sizes length " + std::to_string(scenario.cache_size_bits.size()) +
            " with N=" + std::to_string(n_cdns));
  } else {
    for (int n = 0; n < n_cdns; ++n) {
      if (!(scenario.cache_size_bits[n] > 0.0)) {
        add(Errc::NonPositiveQuantity,
            "cache size of cdn " + std::to_string(n) + " must be positive");
      }
    }
  }

  if (static_cast<int>(scenario.hit_targets.size()) != n_cdns) {
    add(Errc::DimensionMismatch,
        "hit_targets length " + std::to_string(scenario.hit_targets.size()) +
            " with N=" + std::to_string(n_cdns));
  } else {
    for (int n = 0; n < n_cdns; ++n) {
      if (scenario.hit_targets[n] < 0.0) {
        add(Errc::NonPositiveQuantity,
            "hit target of cdn " + std::to_string(n) + " must be non-negative");
      }
    }
  }

  if (!(scenario.total_bandwidth_hz > 0.0)) {
    add(Errc::NonPositiveQuantity, "total bandwidth must be positive");
  }

  auto check_beam = [&add](const BeamLink& beam, const std::string& label) {
    if (!(beam.spectral_efficiency > 0.0)) {
      add(Errc::NonPositiveQuantity,
          label + " spectral efficiency must be positive");
    }
  };
  check_beam(scenario.wide_beam, "wide beam");
  for (int n = 0; n < n_cdns; ++n) {
    check_beam(scenario.spot_beams[n], "spot beam " + std::to_string(n));
  }

  if (scenario.reuse_mode == ReuseMode::MultiSpotReuse) {
    for (int n = 0; n < n_cdns; ++n) {
      if (!scenario.spot_beams[n].color) {
        add(Errc::MissingColor,
            "spot beam " + std::to_string(n) + " has no reuse color");
      } else if (*scenario.spot_beams[n].color < 0) {
        add(Errc::InvalidArgument,
            "spot beam " + std::to_string(n) + " has a negative color index");
      }
    }
    if (scenario.num_colors() < 1 && report.ok()) {
      add(Errc::MissingColor, "reuse mode enabled but no colors defined");
    }
  }

  return report;
}

void require_valid(const NetworkScenario& scenario,
                   const ContentCatalog& catalog, const DemandMatrix& demand) {
  ValidationReport report = validate_scenario(scenario, catalog, demand);
  if (!report.ok()) {
    throw Error(report.issues.front().code, report.to_string());
  }
}

const ConstraintEntry* ConstraintReport::worst() const {
  const ConstraintEntry* worst_entry = nullptr;
  for (const auto& entry : entries) {
    if (!worst_entry || entry.slack < worst_entry->slack) worst_entry = &entry;
  }
  return worst_entry;
}

ConstraintReport check_feasible(const JointSolution& solution,
                                const NetworkScenario& scenario,
                                const ContentCatalog& catalog,
                                const DemandMatrix& demand,
                                double tolerance) {
  const int n_cdns = scenario.num_cdns();
  const int n_items = catalog.size();
  if (solution.num_cdns != n_cdns || solution.num_items != n_items ||
      static_cast<int>(solution.bandwidth_hz.size()) != n_cdns + 1 ||
      demand.num_cdns() != n_cdns || demand.num_items() != n_items) {
    throw Error(Errc::DimensionMismatch,
                "solution/scenario/demand dimensions disagree");
  }

  ConstraintReport report;
  auto push = [&](const std::string& family, int index, double slack,
                  double scale) {
    ConstraintEntry entry;
    entry.family = family;
    entry.index = index;
    entry.slack = slack;
    entry.ok = slack >= -tolerance * std::max(1.0, scale);
    report.feasible = report.feasible && entry.ok;
    report.entries.push_back(entry);
  };

  const auto loads = solution.beam_loads_bits(catalog);
  const double tau = solution.feeding_time_s;

  // (2a) minimum hits per CDN
  for (int n = 0; n < n_cdns; ++n) {
    double hits_n = 0.0;
    for (int f = 0; f < n_items; ++f) {
      hits_n += demand.at(n, f) * (solution.stored(n, f) + solution.spot(n, f));
    }
    push("min_hits", n, hits_n - scenario.hit_targets[n],
         std::abs(scenario.hit_targets[n]));
  }

  // (2b) wide-beam throughput, original bilinear form
  {
    double cap = solution.bandwidth_hz[0] *
                 scenario.wide_beam.spectral_efficiency * tau;
    push("wide_throughput", -1, cap - loads[0], std::max(cap, loads[0]));
  }
  // (2c) per-spot throughput
  for (int n = 0; n < n_cdns; ++n) {
    double cap = solution.bandwidth_hz[n + 1] *
                 scenario.spot_beams[n].spectral_efficiency * tau;
    push("spot_throughput", n, cap - loads[n + 1], std::max(cap, loads[n + 1]));
  }

  // (2d) cache capacity
  for (int n = 0; n < n_cdns; ++n) {
    double cached = 0.0;
    for (int f = 0; f < n_items; ++f) {
      cached += catalog.sizes_bits[f] *
                (solution.stored(n, f) + solution.spot(n, f));
    }
    push("cache_capacity", n, scenario.cache_size_bits[n] - cached,
         scenario.cache_size_bits[n]);
  }

  // (2e) a file is not delivered twice to the same CDN
  for (int n = 0; n < n_cdns; ++n) {
    double worst = 1.0;
    for (int f = 0; f < n_items; ++f) {
      worst = std::min(worst, 1.0 - solution.stored(n, f) - solution.spot(n, f));
    }
    push("exclusive_delivery", n, worst, 1.0);
  }

  // (2f) storing from the wide beam requires the file to be broadcast
  for (int n = 0; n < n_cdns; ++n) {
    double worst = 1.0;
    for (int f = 0; f < n_items; ++f) {
      worst = std::min(worst,
                       solution.wide_broadcast[f] - solution.stored(n, f));
    }
    push("store_requires_broadcast", n, worst, 1.0);
  }

  // (2g) bandwidth budget under the scenario's reuse mode
  {
    BandwidthBudget budget = bandwidth_budget_constraints(scenario);
    double used = budget.spectrum_required(scenario, solution.bandwidth_hz);
    push("bandwidth_budget", -1, scenario.total_bandwidth_hz - used,
         scenario.total_bandwidth_hz);
  }

  // (2h) binarity of the caching decisions
  {
    double gap = solution.binarity_gap();
    push("binary", -1, -gap, 1.0);
  }

  const ConstraintEntry* worst_entry = report.worst();
  report.worst_slack = worst_entry ? worst_entry->slack : 0.0;
  return report;
}

BandwidthBudget bandwidth_budget_constraints(const NetworkScenario& scenario) {
  BandwidthBudget budget;
  const int n_cdns = scenario.num_cdns();

  if (scenario.reuse_mode == ReuseMode::Multicarrier) {
    BandwidthRow row;
    row.name = "total_bandwidth";
    for (int k = 0; k <= n_cdns; ++k) row.beam_terms.push_back({k, 1.0});
    row.rhs = scenario.total_bandwidth_hz;
    budget.rows.push_back(std::move(row));
    return budget;
  }

  const int colors = scenario.num_colors();
  for (int n = 0; n < n_cdns; ++n) {
    if (!scenario.spot_beams[n].color) {
      throw Error(Errc::MissingColor,
                  "spot beam " + std::to_string(n) + " has no reuse color");
    }
  }
  budget.num_color_bands = colors;

  BandwidthRow total;
  total.name = "total_bandwidth";
  total.beam_terms.push_back({0, 1.0});  // wide-beam spectrum is not reusable
  for (int c = 0; c < colors; ++c) total.band_terms.push_back({c, 1.0});
  total.rhs = scenario.total_bandwidth_hz;
  budget.rows.push_back(std::move(total));

  for (int n = 0; n < n_cdns; ++n) {
    BandwidthRow row;
    row.name = "subband_cap_beam_" + std::to_string(n + 1);
    row.beam_terms.push_back({n + 1, 1.0});
    row.band_terms.push_back({*scenario.spot_beams[n].color, -1.0});
    row.rhs = 0.0;
    budget.rows.push_back(std::move(row));
  }
  return budget;
}

double BandwidthBudget::spectrum_required(
    const NetworkScenario& scenario, std::span<const double> bandwidth_hz) const {
  if (scenario.reuse_mode == ReuseMode::Multicarrier) {
    double sum = 0.0;
    for (double w : bandwidth_hz) sum += w;
    return sum;
  }
  const int colors = scenario.num_colors();
  std::vector<double> band(colors, 0.0);
  for (int n = 0; n < scenario.num_cdns(); ++n) {
    int c = *scenario.spot_beams[n].color;
    band[c] = std::max(band[c], bandwidth_hz[n + 1]);
  }
  double sum = bandwidth_hz[0];
  for (double w : band) sum += w;
  return sum;
}

BandwidthAllocation allocate_bandwidth(const NetworkScenario& scenario,
                                       std::span<const double> loads_bits) {
  const int n_cdns = scenario.num_cdns();
  if (static_cast<int>(loads_bits.size()) != n_cdns + 1) {
    throw Error(Errc::DimensionMismatch, "expected N+1 beam loads");
  }

  BandwidthAllocation alloc;
  alloc.bandwidth_hz.assign(n_cdns + 1, 0.0);

  // Per-beam spectrum-time demand: a beam with load L and efficiency gamma
  // needs w * tau = L / gamma. Beams sharing a reuse color transmit
  // concurrently in the same sub-band, so only the color's worst beam counts.
  const double wide_need =
      loads_bits[0] > 0.0
          ? loads_bits[0] / scenario.wide_beam.spectral_efficiency
          : 0.0;

  double total_need = wide_need;
  if (scenario.reuse_mode == ReuseMode::Multicarrier) {
    for (int n = 0; n < n_cdns; ++n) {
      if (loads_bits[n + 1] > 0.0) {
        total_need +=
            loads_bits[n + 1] / scenario.spot_beams[n].spectral_efficiency;
      }
    }
  } else {
    const int colors = scenario.num_colors();
    std::vector<double> color_need(colors, 0.0);
    for (int n = 0; n < n_cdns; ++n) {
      if (loads_bits[n + 1] > 0.0) {
        int c = *scenario.spot_beams[n].color;
        color_need[c] = std::max(
            color_need[c],
            loads_bits[n + 1] / scenario.spot_beams[n].spectral_efficiency);
      }
    }
    for (double need : color_need) total_need += need;
  }

  if (total_need <= 0.0) return alloc;  // nothing to send

  const double tau = total_need / scenario.total_bandwidth_hz;
  alloc.feeding_time_s = tau;
  if (loads_bits[0] > 0.0) {
    alloc.bandwidth_hz[0] =
        loads_bits[0] / (scenario.wide_beam.spectral_efficiency * tau);
  }
  for (int n = 0; n < n_cdns; ++n) {
    if (loads_bits[n + 1] > 0.0) {
      alloc.bandwidth_hz[n + 1] =
          loads_bits[n + 1] /
          (scenario.spot_beams[n].spectral_efficiency * tau);
    }
  }
  return alloc;
}

SpectrumNeed min_spectrum_for_loads(const NetworkScenario& scenario,
                                    std::span<const double> loads_bits,
                                    double tau_s) {
  const int n_cdns = scenario.num_cdns();
  if (static_cast<int>(loads_bits.size()) != n_cdns + 1) {
    throw Error(Errc::DimensionMismatch, "expected N+1 beam loads");
  }
  SpectrumNeed need;
  need.bandwidth_hz.assign(n_cdns + 1, 0.0);
  if (tau_s <= 0.0) {
    bool any_load = false;
    for (double load : loads_bits) any_load = any_load || load > 0.0;
    need.total_hz = any_load
                        ? std::numeric_limits<double>::infinity()
                        : 0.0;
    return need;
  }

  if (loads_bits[0] > 0.0) {
    need.bandwidth_hz[0] =
        loads_bits[0] / (scenario.wide_beam.spectral_efficiency * tau_s);
  }
  for (int n = 0; n < n_cdns; ++n) {
    if (loads_bits[n + 1] > 0.0) {
      need.bandwidth_hz[n + 1] =
          loads_bits[n + 1] /
          (scenario.spot_beams[n].spectral_efficiency * tau_s);
    }
  }
  BandwidthBudget budget = bandwidth_budget_constraints(scenario);
  need.total_hz = budget.spectrum_required(scenario, need.bandwidth_hz);
  return need;
}

}  // namespace satcache
