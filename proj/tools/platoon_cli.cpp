// Command line front end for the platoon robustness library.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "platoon/dde_sim.hpp"
#include "platoon/errors.hpp"
#include "platoon/experiments.hpp"
#include "platoon/robustness.hpp"
#include "platoon/serialize.hpp"

namespace fs = std::filesystem;
using namespace platoon;

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kNumericalError = 3, kCheckViolation = 4 };

struct RawOptions {
  std::string arrangement = "md";
  std::string scenario_file;
  std::string hinf_dynamics = "velocity";
  std::string sim_dynamics = "velocity";
  std::string delay_mode = "full";
  std::string disturbance = "zero";
  std::string gamma;
  std::size_t points = 4000;
  bool verify = false;
};

std::ofstream open_output(const ScenarioConfig& cfg, const std::string& name) {
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw ParameterError("cannot write " + (dir / name).string());
  return out;
}

void announce(const ScenarioConfig& cfg, const std::string& name) {
  std::cout << "wrote " << (fs::path(cfg.output_dir) / name).string() << '\n';
}

bool print_checks(const std::vector<CheckResult>& checks) {
  bool all = true;
  for (const auto& c : checks) {
    std::cout << (c.passed ? "  ok    " : "  FAIL  ") << c.name << ": " << c.detail << '\n';
    all = all && c.passed;
  }
  return all;
}

int run(const ScenarioConfig& cfg, const RawOptions& raw) {
  const Scenario scenario = make_scenario(cfg);
  bool violated = false;

  switch (cfg.experiment) {
    case Experiment::report: {
      const auto report = analyze(scenario.topology, scenario.refs, cfg.gamma);
      open_output(cfg, "report.json") << report_to_json(report) << '\n';
      std::cout << report_summary(report);
      announce(cfg, "report.json");
      if (!report.lambda_min_certificate.holds || !report.lambda_max_certificate.holds) violated = true;
      break;
    }
    case Experiment::sweep_remove:
    case Experiment::sweep_add: {
      const bool remove = cfg.experiment == Experiment::sweep_remove;
      const auto result = remove ? run_remove_sweep(scenario) : run_add_sweep(scenario);
      const std::string name = remove ? "sweep_remove.csv" : "sweep_add.csv";
      auto out = open_output(cfg, name);
      write_csv(result, scenario, out);
      announce(cfg, name);
      break;
    }
    case Experiment::delay_grid: {
      DelayGridOptions options;
      options.horizon = cfg.horizon;
      options.step = cfg.step;
      options.seed = cfg.seed;
      const auto result = run_delay_grid(scenario, cfg.taus, options);
      auto out = open_output(cfg, "delay_grid.csv");
      write_csv(result, scenario, out);
      for (const auto& row : result.rows)
        std::cout << "tau=" << row.tau << "  velocity " << (row.velocity.stable ? "stable" : "unstable")
                  << "  formation " << (row.formation.stable ? "stable" : "unstable") << '\n';
      announce(cfg, "delay_grid.csv");
      for (const auto& v : delay_grid_violations(result)) {
        std::cerr << "violation: " << v << '\n';
        violated = true;
      }
      break;
    }
    case Experiment::hinf_sweep: {
      const Dynamics d = cfg.dynamics;
      const auto gs = ground(scenario.topology, scenario.refs);
      const auto spectrum = eig_sym(gs.lg());
      const auto grid = raw.points == 4000 ? FrequencyGrid::defaults(spectrum, d)
                                           : FrequencyGrid::logarithmic(1e-4, 1e3, raw.points);
      const auto response = sweep_hinf(spectrum, d, grid);
      const std::string name = "hinf_sweep_" + to_string(d) + ".csv";
      auto out = open_output(cfg, name);
      write_csv(response, out);
      const double analytic = d == Dynamics::velocity ? hinf_velocity(spectrum).value() : hinf_formation(spectrum);
      std::cout << "peak " << response.peak_gain << " at omega=" << response.peak_omega << ", closed form " << analytic
                << '\n';
      announce(cfg, name);
      if (std::abs(response.peak_gain - analytic) > 5e-3 * analytic) violated = true;
      break;
    }
    case Experiment::scaling: {
      const auto result = run_scaling(cfg.k, cfg.ns);
      auto csv = open_output(cfg, "scaling.csv");
      write_csv(result, csv);
      open_output(cfg, "scaling.json") << scaling_to_json(result) << '\n';
      std::cout << "single-reference slopes: velocity " << result.single_velocity_fit.slope << ", formation "
                << result.single_formation_fit.slope << "\nMD bounded: " << (result.md_bounded ? "yes" : "no")
                << '\n';
      announce(cfg, "scaling.csv");
      announce(cfg, "scaling.json");
      violated = !result.md_bounded;
      break;
    }
    case Experiment::simulate: {
      const auto gs = ground(scenario.topology, scenario.refs);
      const SimSystem sys = cfg.dynamics == Dynamics::velocity ? SimSystem::velocity(gs) : SimSystem::formation(gs);
      const auto x0 = random_state(sys.state_size(), cfg.seed);
      Disturbance dist = Disturbance::zero();
      if (cfg.disturbance == DisturbanceKind::sinusoid) dist = Disturbance::sinusoid(cfg.amplitude, cfg.omega);
      if (cfg.disturbance == DisturbanceKind::noise) dist = Disturbance::uniform_noise(cfg.amplitude, cfg.hold, cfg.seed);
      SimOptions options;
      options.horizon = cfg.horizon;
      options.step = cfg.step;
      const DelaySpec delay{cfg.tau, cfg.tau > 0.0 ? cfg.delay_mode : DelayMode::none};
      const Trajectory traj = simulate(sys, delay, x0, options, dist);
      const auto verdict = classify(traj);
      auto out = open_output(cfg, "trajectory.csv");
      write_csv(traj, TrajectoryMetadata{cfg.n, cfg.k, cfg.seed}, out);
      std::cout << to_string(cfg.dynamics) << " tau=" << traj.tau << (traj.diverged ? " diverged" : "")
                << " decay ratio " << verdict.decay_ratio << " -> " << (verdict.stable ? "stable" : "unstable")
                << '\n';
      announce(cfg, "trajectory.csv");
      break;
    }
    case Experiment::verify: {
      const auto checks = verify_scenario(scenario);
      open_output(cfg, "verify.json") << checks_to_json(checks) << '\n';
      const bool all = print_checks(checks);
      announce(cfg, "verify.json");
      return all ? kOk : kCheckViolation;
    }
  }

  if (raw.verify) {
    const bool all = print_checks(verify_scenario(scenario));
    if (!all || violated) return kCheckViolation;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robustness analysis of k-nearest-neighbor vehicle platoons"};
  app.set_config("--config", "", "INI file with option values (flags given on the command line win)");
  app.allow_config_extras(false);
  app.require_subcommand(1, 1);
  app.fallthrough();

  ScenarioConfig cfg;
  RawOptions raw;
  bool emit_config = false;

  app.add_option("-n,--n", cfg.n, "Number of vehicles")->capture_default_str();
  app.add_option("-k,--k", cfg.k, "Communication range")->capture_default_str();
  app.add_option("--arrangement", raw.arrangement, "md | explicit | single")->capture_default_str();
  app.add_option("--refs", cfg.refs, "Reference vehicles (1-based) for --arrangement explicit")->delimiter(',');
  app.add_option("--ref-position", cfg.ref_position, "Reference vehicle for --arrangement single")
      ->capture_default_str();
  app.add_option("--scenario", raw.scenario_file, "JSON scenario {\"n\",\"k\",\"refs\"}; implies explicit refs");
  app.add_option("--seed", cfg.seed, "Seed for initial states and noise")->capture_default_str();
  app.add_option("--horizon", cfg.horizon, "Simulation horizon (0 = per-run default)")->capture_default_str();
  app.add_option("--step", cfg.step, "Integration step (0 = per-run default)")->capture_default_str();
  app.add_option("-o,--output-dir", cfg.output_dir, "Directory for emitted files")->capture_default_str();
  app.add_flag("--verify", raw.verify, "Run the built-in checks afterwards; exit 4 on any violation");
  app.add_flag("--emit-config", emit_config, "Print the effective configuration and exit")->configurable(false);

  auto* report = app.add_subcommand("report", "JSON report of every closed-form metric");
  report->add_option("--gamma", raw.gamma, "Target H-infinity level for the reference-neighbor conditions");
  auto* remove = app.add_subcommand("sweep-remove", "Demote each MD reference in turn");
  auto* add = app.add_subcommand("sweep-add", "Promote each follower in turn");
  auto* grid = app.add_subcommand("delay-grid", "Simulate both dynamics over a list of delays");
  grid->add_option("--taus", cfg.taus, "Delays to simulate")->delimiter(',')->required();
  auto* hinf = app.add_subcommand("hinf-sweep", "Frequency response sweep of the largest singular value");
  hinf->add_option("--dynamics", raw.hinf_dynamics, "velocity | formation")->capture_default_str();
  hinf->add_option("--points", raw.points, "Logarithmic grid points")->capture_default_str();
  auto* scaling = app.add_subcommand("scaling", "H-infinity growth with n: single end reference versus MD");
  scaling->add_option("--ns", cfg.ns, "Platoon sizes (at least five)")->delimiter(',')->required();
  auto* sim = app.add_subcommand("simulate", "Time-domain run with a constant delay");
  sim->add_option("--dynamics", raw.sim_dynamics, "velocity | formation")->capture_default_str();
  sim->add_option("--tau", cfg.tau, "Delay")->capture_default_str();
  sim->add_option("--delay-mode", raw.delay_mode, "full | self-undelayed")->capture_default_str();
  sim->add_option("--disturbance", raw.disturbance, "zero | sinusoid | noise")->capture_default_str();
  sim->add_option("--amplitude", cfg.amplitude, "Disturbance amplitude")->capture_default_str();
  sim->add_option("--omega", cfg.omega, "Sinusoid frequency")->capture_default_str();
  sim->add_option("--hold", cfg.hold, "Noise hold time")->capture_default_str();
  auto* verify = app.add_subcommand("verify", "Oracle cross-checks and bound checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  if (emit_config) {
    std::cout << app.config_to_str(true, true);
    return kOk;
  }

  try {
    if (report->parsed()) cfg.experiment = Experiment::report;
    if (remove->parsed()) cfg.experiment = Experiment::sweep_remove;
    if (add->parsed()) cfg.experiment = Experiment::sweep_add;
    if (grid->parsed()) cfg.experiment = Experiment::delay_grid;
    if (hinf->parsed()) cfg.experiment = Experiment::hinf_sweep;
    if (scaling->parsed()) cfg.experiment = Experiment::scaling;
    if (sim->parsed()) cfg.experiment = Experiment::simulate;
    if (verify->parsed()) cfg.experiment = Experiment::verify;

    cfg.arrangement = parse_arrangement(raw.arrangement);
    cfg.dynamics = parse_dynamics(hinf->parsed() ? raw.hinf_dynamics : raw.sim_dynamics);
    cfg.delay_mode = parse_delay_mode(raw.delay_mode);
    cfg.disturbance = parse_disturbance_kind(raw.disturbance);
    if (report->parsed() && !raw.gamma.empty()) {
      double g = 0.0;
      const auto* end = raw.gamma.data() + raw.gamma.size();
      const auto res = std::from_chars(raw.gamma.data(), end, g);
      if (res.ec != std::errc() || res.ptr != end) throw ParameterError("gamma must be a number");
      cfg.gamma = g;
    }
    if (!raw.scenario_file.empty()) {
      std::ifstream in(raw.scenario_file);
      if (!in) throw ParameterError("cannot read scenario file " + raw.scenario_file);
      std::stringstream buffer;
      buffer << in.rdbuf();
      const Scenario s = scenario_from_json(buffer.str());
      cfg.n = s.topology.n();
      cfg.k = s.topology.k();
      cfg.refs.assign(s.refs.refs().begin(), s.refs.refs().end());
      cfg.arrangement = Arrangement::explicit_list;
    }
    return run(cfg, raw);
  } catch (const ParameterError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  }
}
