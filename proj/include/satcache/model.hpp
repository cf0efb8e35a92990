// Core domain types for the satellite-fed edge caching toolkit: content
// catalog, per-CDN demand, beam links, scenario description, and the joint
// placement/bandwidth solution, plus the shared constraint system used by
// every solver in this project.
//
// Conventions (fixed across the whole toolkit):
//   file sizes and cache sizes   -> bits
//   bandwidth                    -> Hz
//   feeding time                 -> seconds
//   spectral efficiency          -> bits/s/Hz
// so the capacity of a link over the feeding window is w * gamma * tau bits.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace satcache {

enum class Errc {
  DimensionMismatch,
  NonPositiveQuantity,
  MissingColor,
  UnreadableSource,
  EmptyCorpus,
  InsufficientItems,
  InvalidAnchor,
  InfeasibleTargets,
  InfeasibleAfterRounding,
  BelowMinimumModcod,
  UnknownZip,
  NumericalFailure,
  InvalidArgument,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct ContentCatalog {
  std::vector<std::string> ids;
  std::vector<double> sizes_bits;

  int size() const { return static_cast<int>(sizes_bits.size()); }
  double total_bits() const;
};

// Expected request counts, one row per CDN, one column per catalog item.
class DemandMatrix {
 public:
  DemandMatrix() = default;
  DemandMatrix(int num_cdns, int num_items)
      : cdns_(num_cdns), items_(num_items),
        counts_(static_cast<size_t>(num_cdns) * num_items, 0.0) {}

  double at(int cdn, int item) const {
    return counts_[static_cast<size_t>(cdn) * items_ + item];
  }
  double& at(int cdn, int item) {
    return counts_[static_cast<size_t>(cdn) * items_ + item];
  }
  std::span<const double> row(int cdn) const {
    return {counts_.data() + static_cast<size_t>(cdn) * items_,
            static_cast<size_t>(items_)};
  }

  int num_cdns() const { return cdns_; }
  int num_items() const { return items_; }
  double cdn_total(int cdn) const;
  double item_total(int item) const;
  double total() const;

 private:
  int cdns_ = 0;
  int items_ = 0;
  std::vector<double> counts_;
};

struct BeamLink {
  std::string beam_id;
  std::optional<double> snr_db;
  double spectral_efficiency = 0.0;  // bits/s/Hz
  std::optional<int> color;          // frequency-reuse color (spot beams only)
};

enum class ReuseMode {
  Multicarrier,    // every beam gets its own slice of the total bandwidth
  MultiSpotReuse,  // spot beams of one color share a sub-band simultaneously
};

struct NetworkScenario {
  BeamLink wide_beam;
  std::vector<BeamLink> spot_beams;    // one entry per CDN; index n serves CDN n
  std::vector<double> cache_size_bits; // M_n
  std::vector<double> hit_targets;     // minimum expected hits per CDN
  double total_bandwidth_hz = 0.0;
  ReuseMode reuse_mode = ReuseMode::Multicarrier;

  int num_cdns() const { return static_cast<int>(spot_beams.size()); }
  // Number of distinct colors (0 in Multicarrier mode).
  int num_colors() const;
};

struct SolveDiagnostics {
  int iterations = 0;
  std::vector<double> objective_trace;
  double relaxation_residual = 0.0;  // max binarity gap before recovery
  std::string solver_status = "n/a";
  bool converged = true;
};

// A joint caching + bandwidth decision. The caching vectors hold relaxed
// values in [0,1] while a solver is still working and exact {0,1} after
// binary recovery.
struct JointSolution {
  static JointSolution zeros(int num_cdns, int num_items);

  int num_cdns = 0;
  int num_items = 0;
  std::vector<double> wide_broadcast;    // x, size F
  std::vector<double> stored_from_wide;  // x_n, N*F row-major
  std::vector<double> multicast;         // y_n, N*F row-major
  std::vector<double> bandwidth_hz;      // size N+1, index 0 = wide beam
  double feeding_time_s = 0.0;
  SolveDiagnostics diagnostics;

  double stored(int n, int f) const {
    return stored_from_wide[static_cast<size_t>(n) * num_items + f];
  }
  double& stored(int n, int f) {
    return stored_from_wide[static_cast<size_t>(n) * num_items + f];
  }
  double spot(int n, int f) const {
    return multicast[static_cast<size_t>(n) * num_items + f];
  }
  double& spot(int n, int f) {
    return multicast[static_cast<size_t>(n) * num_items + f];
  }

  // Delivered bits per beam implied by the caching decisions: index 0 is the
  // wide-beam broadcast load, index n >= 1 the multicast load toward CDN n.
  std::vector<double> beam_loads_bits(const ContentCatalog& catalog) const;
  double hits(const DemandMatrix& demand) const;
  // Max over all caching variables of min(v, 1-v); 0 for a binary point.
  double binarity_gap() const;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ValidationIssue {
  Errc code;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string to_string() const;
};

// Checks every type invariant and cross-dimension agreement. Collects all
// violations instead of stopping at the first.
ValidationReport validate_scenario(const NetworkScenario& scenario,
                                   const ContentCatalog& catalog,
                                   const DemandMatrix& demand);

// Throws Error with the first issue's code if validation fails.
void require_valid(const NetworkScenario& scenario,
                   const ContentCatalog& catalog, const DemandMatrix& demand);

// ---------------------------------------------------------------------------
// Constraint system
// ---------------------------------------------------------------------------

struct ConstraintEntry {
  std::string family;  // min_hits, wide_throughput, spot_throughput,
                       // cache_capacity, exclusive_delivery,
                       // store_requires_broadcast, bandwidth_budget, binary
  int index = -1;      // CDN or item index where applicable
  double slack = 0.0;  // >= 0 means satisfied
  bool ok = true;
};

struct ConstraintReport {
  std::vector<ConstraintEntry> entries;
  bool feasible = true;
  double worst_slack = 0.0;

  const ConstraintEntry* worst() const;
};

// Evaluates every constraint family at the given point. Throughput is checked
// in its original bilinear form (load <= w * gamma * tau). `tolerance` is the
// relative slack allowed before an entry is marked violated.
ConstraintReport check_feasible(const JointSolution& solution,
                                const NetworkScenario& scenario,
                                const ContentCatalog& catalog,
                                const DemandMatrix& demand,
                                double tolerance = 1e-6);

// One row of the bandwidth budget: sum of terms <= rhs. Beam terms index into
// w (0 = wide), band terms into the per-color sub-band widths that exist only
// under MultiSpotReuse.
struct BandwidthRow {
  std::string name;
  std::vector<std::pair<int, double>> beam_terms;
  std::vector<std::pair<int, double>> band_terms;
  double rhs = 0.0;
};

struct BandwidthBudget {
  std::vector<BandwidthRow> rows;
  int num_color_bands = 0;

  // Smallest total spectrum that supports the given per-beam allocation, i.e.
  // w_0 + sum_c max_{n in c} w_n under reuse, plain sum otherwise.
  double spectrum_required(const NetworkScenario& scenario,
                           std::span<const double> bandwidth_hz) const;
};

// Multicarrier: the single row sum_n w_n <= W_tot. MultiSpotReuse: one
// sub-band variable per color, w_0 + sum_c W_c <= W_tot, and w_n <= W_color(n)
// for every spot beam. Throws MissingColor if a reuse scenario has an
// uncolored beam.
BandwidthBudget bandwidth_budget_constraints(const NetworkScenario& scenario);

// Minimal feeding time for fixed beam loads, with the bandwidth split chosen
// optimally under the scenario's reuse mode. loads_bits has N+1 entries
// (index 0 = wide). Returns tau = 0 and zero bandwidth when nothing is sent.
struct BandwidthAllocation {
  std::vector<double> bandwidth_hz;
  double feeding_time_s = 0.0;
};
BandwidthAllocation allocate_bandwidth(const NetworkScenario& scenario,
                                       std::span<const double> loads_bits);

// Least total spectrum that ships the given loads within tau seconds, and the
// per-beam allocation achieving it. Used by the fixed-time solvers.
struct SpectrumNeed {
  std::vector<double> bandwidth_hz;
  double total_hz = 0.0;
};
SpectrumNeed min_spectrum_for_loads(const NetworkScenario& scenario,
                                    std::span<const double> loads_bits,
                                    double tau_s);

}  // namespace satcache
