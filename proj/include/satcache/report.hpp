// The experiment harness: run a parameter sweep of the joint design against
// the reference schemes and produce plot-ready CSV plus a JSON summary.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "satcache/feedtime.hpp"
#include "satcache/hits.hpp"
#include "satcache/model.hpp"

namespace satcache {

enum class SweepAxis { TargetChr, CacheSize, FeedingTime };

const char* sweep_axis_name(SweepAxis axis);

struct SweepSpec {
  SweepAxis axis = SweepAxis::CacheSize;
  std::vector<double> values;  // strictly increasing
  std::vector<std::string> schemes = {"joint", "ref1", "ref2", "ref3"};
  bool compare_reuse = false;  // joint runs once per spectrum configuration
  uint64_t seed = 1;
  double fixed_tau_s = 100.0;  // feeding window for the hits axes
  HitsMethod method = HitsMethod::RelaxRoundRepair;
  ScaConfig sca;
  SolverTolerances solver;
};

struct ReportRow {
  double axis_value = 0.0;
  std::string scheme;
  double tau_s = 0.0;
  double hits = 0.0;
  double chr = 0.0;
  double wide_bits = 0.0;  // broadcast data volume of the placement
  double spot_bits = 0.0;  // multicast data volume across CDNs
  std::string solver_status;
  double gap = -1.0;  // < 0 when the scheme reports none
};

struct SweepOutcome {
  std::vector<ReportRow> rows;
  // Placements aligned with rows, for the per-point solution export.
  std::vector<JointSolution> solutions;
  // Iteration traces aligned with rows; empty except for feeding-time
  // minimization runs.
  std::vector<ScaTrace> traces;
};

// Runs every (axis value, scheme) combination; points execute in a bounded
// worker pool and the outcome is ordered and deterministic for a fixed
// spec. Throws InvalidArgument for unusable combinations (ref3 on the
// feeding-time axis, reuse comparison without colors).
SweepOutcome run_sweep(const NetworkScenario& scenario,
                       const ContentCatalog& catalog,
                       const DemandMatrix& demand, const SweepSpec& spec);

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows);
// Wide-vs-spot cached data volumes per axis point (the split report).
void write_split_csv(std::ostream& out, const std::vector<ReportRow>& rows);
std::string summary_json(const SweepSpec& spec,
                         const std::vector<ReportRow>& rows);

// Machine-readable error envelope used by the CLI on any failure.
std::string error_json(const std::string& code, const std::string& message);

}  // namespace satcache
