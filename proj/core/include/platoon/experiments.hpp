#pragma once

// Scenario runner: reference add/remove sweeps, delay stability grids,
// H-infinity scaling fits, built-in verification checks, and CSV emission.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "platoon/dde_sim.hpp"
#include "platoon/robustness.hpp"
#include "platoon/topology.hpp"

namespace platoon {

enum class Arrangement { md, explicit_list, single };
enum class Experiment { report, delay_grid, hinf_sweep, sweep_remove, sweep_add, scaling, simulate, verify };

std::string to_string(Arrangement a);
Arrangement parse_arrangement(const std::string& s);
std::string to_string(Experiment e);

enum class DisturbanceKind { zero, sinusoid, noise };
DisturbanceKind parse_disturbance_kind(const std::string& s);

struct ScenarioConfig {
  int n = 36;
  int k = 4;
  Arrangement arrangement = Arrangement::md;
  std::vector<VehicleIndex> refs;  // Arrangement::explicit_list
  VehicleIndex ref_position = 1;   // Arrangement::single
  Experiment experiment = Experiment::report;

  std::optional<double> gamma;
  std::vector<double> taus;  // delay-grid
  std::vector<int> ns;       // scaling
  double horizon = 0.0;      // <= 0: per-run default
  double step = 0.0;         // <= 0: per-run default
  std::uint64_t seed = 1;

  // simulate
  Dynamics dynamics = Dynamics::velocity;
  DelayMode delay_mode = DelayMode::full;
  double tau = 0.0;
  DisturbanceKind disturbance = DisturbanceKind::zero;
  double amplitude = 0.0;
  double omega = 1.0;
  double hold = 0.1;

  std::string output_dir = ".";
};

/// Throws ParameterError describing the first invalid field for `cfg.experiment`.
void validate(const ScenarioConfig& cfg);

struct Scenario {
  PlatoonTopology topology;
  ReferenceSet refs;
};

/// Validates and builds the platoon graph and reference placement.
Scenario make_scenario(const ScenarioConfig& cfg);

struct SweepRow {
  VehicleIndex position = 0;
  HinfNorm hinf_velocity = HinfNorm::unbounded();
  double hinf_formation = 0.0;
  double lambda1 = 0.0;
};

struct SweepResult {
  std::string variable;  // "removed" or "added"
  double baseline_velocity = 0.0;
  double baseline_formation = 0.0;
  std::vector<SweepRow> rows;  // ordered by position
};

/// Demotes each reference in turn. Needs at least two references.
SweepResult run_remove_sweep(const Scenario& scenario);
/// Promotes each follower in turn.
SweepResult run_add_sweep(const Scenario& scenario);

struct DelayGridOptions {
  double horizon = 0.0;  // <= 0: default_horizon per run
  double step = 0.0;     // <= 0: default_step(tau) per run
  std::uint64_t seed = 1;
};

struct DelayGridRow {
  double tau = 0.0;
  double tau_velocity = 0.0;   // after rounding to whole steps
  double tau_formation = 0.0;
  StabilityVerdict velocity;
  StabilityVerdict formation;
};

struct DelayGridResult {
  double pi_over_8k = 0.0;
  double pi_over_2k = 0.0;
  double quarter_over_k = 0.0;         // 1/(4k)
  double velocity_margin = 0.0;        // pi/(2 lambda_max)
  double formation_rho_bound = 0.0;    // 1/rho(B)
  std::uint64_t seed = 0;
  std::vector<DelayGridRow> rows;  // ordered by tau
};

DelayGridResult run_delay_grid(const Scenario& scenario, std::span<const double> taus,
                               const DelayGridOptions& options = {});

/// Rows whose verdict contradicts a sufficient condition: velocity unstable
/// below pi/(8k) or formation unstable below 1/(4k).
std::vector<std::string> delay_grid_violations(const DelayGridResult& result);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  bool excluded_smallest = false;
};

/// Least squares of log y on log x. The smallest-x point is dropped and the
/// fit redone when its residual exceeds 3x the median absolute residual.
LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y);

struct ScalingRow {
  int n = 0;
  double single_velocity = 0.0;
  double single_formation = 0.0;
  int md_refs = 0;
  double md_velocity = 0.0;
  double md_formation = 0.0;
};

struct ScalingResult {
  int k = 0;
  std::vector<ScalingRow> rows;
  LogLogFit single_velocity_fit;
  LogLogFit single_formation_fit;
  LogLogFit md_velocity_fit;
  LogLogFit md_formation_fit;
  bool md_bounded = false;  // every MD row within 1 and 2/sqrt(3)
};

/// Single reference at vehicle 1 versus the MD arrangement for each n.
/// Requires at least five distinct n >= 2.
ScalingResult run_scaling(int k, std::vector<int> ns);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Oracle cross-checks and bound checks for one scenario.
std::vector<CheckResult> verify_scenario(const Scenario& scenario);

/// Greedy nearest matching; returns the largest matched distance
/// (infinity when sizes differ).
double spectrum_distance(std::span<const std::complex<double>> a, std::span<const std::complex<double>> b);

void write_csv(const SweepResult& result, const Scenario& scenario, std::ostream& out);
void write_csv(const DelayGridResult& result, const Scenario& scenario, std::ostream& out);
void write_csv(const ScalingResult& result, std::ostream& out);

}  // namespace platoon
