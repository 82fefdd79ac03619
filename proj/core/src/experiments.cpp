#include "platoon/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "platoon/errors.hpp"
#include "platoon/spectral.hpp"

namespace platoon {
namespace {

// Runs body(i) for i in [0, count) on a few threads. Callers write into
// preallocated slots, so the output order never depends on scheduling.
template <typename Body>
void parallel_for(std::size_t count, Body body) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void put_number(std::ostream& out, double v) {
  if (std::isinf(v)) {
    out << (v > 0 ? "inf" : "-inf");
    return;
  }
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, r.ptr - buf);
}

void put_hinf(std::ostream& out, const HinfNorm& h) {
  if (h.is_unbounded()) out << "unbounded";
  else put_number(out, h.value());
}

std::string join_refs(std::span<const VehicleIndex> refs) {
  std::string s;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(refs[i]);
  }
  return s;
}

void scenario_header(const Scenario& scenario, std::ostream& out) {
  out << "# n=" << scenario.topology.n() << ", k=" << scenario.topology.k() << ", refs="
      << join_refs(scenario.refs.refs()) << '\n';
}

SweepRow evaluate(const PlatoonTopology& topo, const ReferenceSet& refs, VehicleIndex position) {
  const GroundedSystem gs = ground(topo, refs);
  const Spectrum spectrum = eig_sym(gs.lg());
  SweepRow row;
  row.position = position;
  row.hinf_velocity = hinf_velocity(spectrum);
  row.hinf_formation = hinf_formation(spectrum);
  row.lambda1 = spectrum.min();
  return row;
}

CheckResult check(std::string name, bool passed, std::string detail) {
  return CheckResult{std::move(name), passed, std::move(detail)};
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

std::string to_string(Arrangement a) {
  switch (a) {
    case Arrangement::md: return "md";
    case Arrangement::explicit_list: return "explicit";
    case Arrangement::single: return "single";
  }
  return "md";
}

Arrangement parse_arrangement(const std::string& s) {
  if (s == "md") return Arrangement::md;
  if (s == "explicit") return Arrangement::explicit_list;
  if (s == "single") return Arrangement::single;
  throw ParameterError("unknown arrangement '" + s + "' (expected md, explicit or single)");
}

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::report: return "report";
    case Experiment::delay_grid: return "delay-grid";
    case Experiment::hinf_sweep: return "hinf-sweep";
    case Experiment::sweep_remove: return "sweep-remove";
    case Experiment::sweep_add: return "sweep-add";
    case Experiment::scaling: return "scaling";
    case Experiment::simulate: return "simulate";
    case Experiment::verify: return "verify";
  }
  return "report";
}

DisturbanceKind parse_disturbance_kind(const std::string& s) {
  if (s == "zero" || s == "none") return DisturbanceKind::zero;
  if (s == "sinusoid" || s == "sine") return DisturbanceKind::sinusoid;
  if (s == "noise") return DisturbanceKind::noise;
  throw ParameterError("unknown disturbance '" + s + "' (expected zero, sinusoid or noise)");
}

void validate(const ScenarioConfig& cfg) {
  if (cfg.n < 2) throw ParameterError("n must be >= 2");
  if (cfg.k < 1) throw ParameterError("k must be >= 1");
  switch (cfg.arrangement) {
    case Arrangement::md: break;
    case Arrangement::explicit_list:
      if (cfg.refs.empty()) throw ParameterError("arrangement 'explicit' needs a non-empty refs list");
      for (VehicleIndex r : cfg.refs)
        if (r < 1 || r > cfg.n)
          throw ParameterError("reference index " + std::to_string(r) + " outside 1.." + std::to_string(cfg.n));
      if (static_cast<int>(cfg.refs.size()) >= cfg.n) throw ParameterError("at least one follower is required");
      break;
    case Arrangement::single:
      if (cfg.ref_position < 1 || cfg.ref_position > cfg.n)
        throw ParameterError("ref-position must lie in 1.." + std::to_string(cfg.n));
      break;
  }
  if (cfg.gamma && !(*cfg.gamma > 0.0)) throw ParameterError("gamma must be positive");
  if (!std::isfinite(cfg.horizon) || cfg.horizon < 0.0) throw ParameterError("horizon must be >= 0");
  if (!std::isfinite(cfg.step) || cfg.step < 0.0) throw ParameterError("step must be >= 0");
  if (cfg.horizon > 0.0 && cfg.step > 0.0 && cfg.horizon < 10.0 * cfg.step)
    throw ParameterError("horizon must cover at least 10 steps");

  switch (cfg.experiment) {
    case Experiment::delay_grid:
      if (cfg.taus.empty()) throw ParameterError("delay-grid needs a non-empty taus list");
      for (double t : cfg.taus)
        if (!std::isfinite(t) || t < 0.0) throw ParameterError("taus must be finite and >= 0");
      break;
    case Experiment::scaling: {
      auto ns = cfg.ns;
      std::sort(ns.begin(), ns.end());
      ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
      if (ns.size() < 5) throw ParameterError("scaling needs at least five distinct n values");
      if (ns.front() < 2) throw ParameterError("scaling n values must be >= 2");
      break;
    }
    case Experiment::sweep_remove:
    case Experiment::sweep_add:
      if (cfg.arrangement != Arrangement::md) throw ParameterError("reference sweeps require arrangement md");
      break;
    case Experiment::simulate:
      if (!std::isfinite(cfg.tau) || cfg.tau < 0.0) throw ParameterError("tau must be finite and >= 0");
      if (!std::isfinite(cfg.amplitude) || cfg.amplitude < 0.0) throw ParameterError("amplitude must be >= 0");
      if (!(cfg.hold > 0.0)) throw ParameterError("hold must be positive");
      if (cfg.delay_mode == DelayMode::self_undelayed && cfg.dynamics != Dynamics::velocity)
        throw ParameterError("self-undelayed delay mode is defined for velocity dynamics only");
      break;
    default: break;
  }
}

Scenario make_scenario(const ScenarioConfig& cfg) {
  validate(cfg);
  PlatoonTopology topo = build_platoon(cfg.n, cfg.k);
  switch (cfg.arrangement) {
    case Arrangement::md: return {topo, md_arrangement(cfg.n, cfg.k)};
    case Arrangement::explicit_list: return {topo, ReferenceSet::from_indices(cfg.n, cfg.refs)};
    case Arrangement::single: return {topo, single_reference(cfg.n, cfg.ref_position)};
  }
  throw ParameterError("unknown arrangement");
}

SweepResult run_remove_sweep(const Scenario& scenario) {
  const auto refs = scenario.refs.refs();
  if (refs.size() < 2) throw ParameterError("remove sweep needs at least two references");
  const SweepRow base = evaluate(scenario.topology, scenario.refs, 0);
  SweepResult out;
  out.variable = "removed";
  out.baseline_velocity = base.hinf_velocity.value();
  out.baseline_formation = base.hinf_formation;
  out.rows.resize(refs.size());
  parallel_for(refs.size(), [&](std::size_t i) {
    out.rows[i] = evaluate(scenario.topology, scenario.refs.with_removed(refs[i]), refs[i]);
  });
  return out;
}

SweepResult run_add_sweep(const Scenario& scenario) {
  const auto followers = scenario.refs.followers();
  const SweepRow base = evaluate(scenario.topology, scenario.refs, 0);
  SweepResult out;
  out.variable = "added";
  out.baseline_velocity = base.hinf_velocity.value();
  out.baseline_formation = base.hinf_formation;
  // Promoting the last follower would leave no dynamics.
  const std::size_t count = followers.size() > 1 ? followers.size() : 0;
  out.rows.resize(count);
  parallel_for(count, [&](std::size_t i) {
    out.rows[i] = evaluate(scenario.topology, scenario.refs.with_added(followers[i]), followers[i]);
  });
  return out;
}

DelayGridResult run_delay_grid(const Scenario& scenario, std::span<const double> taus,
                               const DelayGridOptions& options) {
  if (taus.empty()) throw ParameterError("delay grid: empty tau list");
  const GroundedSystem gs = ground(scenario.topology, scenario.refs);
  const Spectrum spectrum = eig_sym(gs.lg());
  const int k = scenario.topology.k();

  DelayGridResult out;
  const auto kb = delay_bounds_k(k);
  out.pi_over_8k = kb.sufficient;
  out.pi_over_2k = kb.necessary;
  const auto fb = delay_margin_formation(spectrum, k);
  out.quarter_over_k = fb.k_bound;
  out.formation_rho_bound = fb.rho_bound;
  out.velocity_margin = delay_margin_velocity(spectrum);
  out.seed = options.seed;

  std::vector<double> sorted(taus.begin(), taus.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  const SimSystem velocity = SimSystem::velocity(gs);
  const SimSystem formation = SimSystem::formation(gs);
  const auto x0_velocity = random_state(velocity.state_size(), options.seed);
  const auto x0_formation = random_state(formation.state_size(), options.seed);

  // Two jobs per tau: even slots velocity, odd slots formation.
  std::vector<Trajectory> runs(2 * sorted.size());
  parallel_for(runs.size(), [&](std::size_t job) {
    const double tau = sorted[job / 2];
    const bool is_velocity = job % 2 == 0;
    const SimSystem& sys = is_velocity ? velocity : formation;
    const DelaySpec delay{tau, DelayMode::full};
    SimOptions so;
    so.horizon = options.horizon;
    so.step = options.step > 0.0 ? options.step : default_step(tau);
    so.record_states = false;
    runs[job] = simulate(sys, delay, is_velocity ? x0_velocity : x0_formation, so);
  });

  for (std::size_t i = 0; i < sorted.size(); ++i) {
    DelayGridRow row;
    row.tau = sorted[i];
    row.tau_velocity = runs[2 * i].tau;
    row.tau_formation = runs[2 * i + 1].tau;
    row.velocity = classify(runs[2 * i]);
    row.formation = classify(runs[2 * i + 1]);
    out.rows.push_back(row);
  }
  return out;
}

std::vector<std::string> delay_grid_violations(const DelayGridResult& result) {
  std::vector<std::string> v;
  for (const auto& row : result.rows) {
    if (row.tau <= result.pi_over_8k && !row.velocity.stable)
      v.push_back("velocity unstable at tau=" + num(row.tau) + " <= pi/(8k)=" + num(result.pi_over_8k));
    if (row.tau < result.quarter_over_k && !row.formation.stable)
      v.push_back("formation unstable at tau=" + num(row.tau) + " < 1/(4k)=" + num(result.quarter_over_k));
  }
  return v;
}

LogLogFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("fit_loglog: need matching series of >= 2 points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ParameterError("fit_loglog: values must be positive");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  auto solve = [](std::span<const double> a, std::span<const double> b) {
    const double n = static_cast<double>(a.size());
    double sa = 0, sb = 0, saa = 0, sab = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      sa += a[i];
      sb += b[i];
      saa += a[i] * a[i];
      sab += a[i] * b[i];
    }
    const double denom = n * saa - sa * sa;
    if (denom == 0.0) throw ParameterError("fit_loglog: x values are all equal");
    LogLogFit f;
    f.slope = (n * sab - sa * sb) / denom;
    f.intercept = (sb - f.slope * sa) / n;
    return f;
  };

  LogLogFit fit = solve(lx, ly);
  if (lx.size() < 3) return fit;
  const auto smallest = static_cast<std::size_t>(std::min_element(lx.begin(), lx.end()) - lx.begin());
  std::vector<double> residuals;
  for (std::size_t i = 0; i < lx.size(); ++i) residuals.push_back(std::abs(ly[i] - fit.intercept - fit.slope * lx[i]));
  std::vector<double> sorted = residuals;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
  double median = sorted[sorted.size() / 2];
  if (sorted.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2)));
  }
  if (residuals[smallest] > 3.0 * median && residuals[smallest] > 1e-12) {
    lx.erase(lx.begin() + static_cast<std::ptrdiff_t>(smallest));
    ly.erase(ly.begin() + static_cast<std::ptrdiff_t>(smallest));
    fit = solve(lx, ly);
    fit.excluded_smallest = true;
  }
  return fit;
}

ScalingResult run_scaling(int k, std::vector<int> ns) {
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  if (ns.size() < 5) throw ParameterError("scaling needs at least five distinct n values");
  if (ns.front() < 2) throw ParameterError("scaling n values must be >= 2");
  if (k < 1) throw ParameterError("scaling needs k >= 1");

  ScalingResult out;
  out.k = k;
  out.rows.resize(ns.size());
  parallel_for(ns.size(), [&](std::size_t i) {
    const int n = ns[i];
    const auto topo = build_platoon(n, k);
    const auto single = eig_sym(ground(topo, single_reference(n, 1)).lg());
    const auto md_refs = md_arrangement(n, k);
    const auto md = eig_sym(ground(topo, md_refs).lg());
    ScalingRow& row = out.rows[i];
    row.n = n;
    row.single_velocity = hinf_velocity(single).value();
    row.single_formation = hinf_formation(single);
    row.md_refs = static_cast<int>(md_refs.refs().size());
    row.md_velocity = hinf_velocity(md).value();
    row.md_formation = hinf_formation(md);
  });

  std::vector<double> x, sv, sf, mv, mf;
  out.md_bounded = true;
  const double formation_cap = 2.0 / std::sqrt(3.0);
  for (const auto& r : out.rows) {
    x.push_back(r.n);
    sv.push_back(r.single_velocity);
    sf.push_back(r.single_formation);
    mv.push_back(r.md_velocity);
    mf.push_back(r.md_formation);
    out.md_bounded = out.md_bounded && r.md_velocity <= 1.0 + 1e-9 && r.md_formation <= formation_cap + 1e-9;
  }
  out.single_velocity_fit = fit_loglog(x, sv);
  out.single_formation_fit = fit_loglog(x, sf);
  out.md_velocity_fit = fit_loglog(x, mv);
  out.md_formation_fit = fit_loglog(x, mf);
  return out;
}

double spectrum_distance(std::span<const std::complex<double>> a, std::span<const std::complex<double>> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  std::vector<bool> used(b.size(), false);
  double worst = 0.0;
  for (const auto& u : a) {
    std::size_t best = b.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(u - b[j]);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    used[best] = true;
    worst = std::max(worst, best_d);
  }
  return worst;
}

std::vector<CheckResult> verify_scenario(const Scenario& scenario) {
  const GroundedSystem gs = ground(scenario.topology, scenario.refs);
  const Spectrum spectrum = eig_sym(gs.lg());
  std::vector<CheckResult> out;

  const auto cmin = certify_lambda_min(gs, spectrum);
  out.push_back(check("lambda_min_bounds", cmin.holds,
                      num(cmin.lower) + " <= " + num(cmin.witnessed) + " <= " + num(cmin.upper)));
  const auto cmax = certify_lambda_max(gs, spectrum);
  out.push_back(check("lambda_max_bounds", cmax.holds,
                      num(cmax.lower) + " <= " + num(cmax.witnessed) + " <= " + num(cmax.upper)));

  const auto bisect = eig_sym_bisection(gs.lg_real());
  double eig_gap = 0.0;
  for (std::size_t i = 0; i < bisect.size(); ++i) eig_gap = std::max(eig_gap, std::abs(bisect[i] - spectrum.values[i]));
  out.push_back(check("jacobi_vs_bisection", eig_gap <= 1e-9, "max gap " + num(eig_gap)));

  double trace_sum = 0.0;
  for (double v : spectrum.values) trace_sum += v;
  const double tr = trace(gs.lg_real());
  out.push_back(check("trace_identity", std::abs(tr - trace_sum) <= 1e-8 * std::max(1.0, std::abs(tr)),
                      "trace " + num(tr) + " vs sum " + num(trace_sum)));

  const double hv = hinf_velocity(spectrum).value();
  const auto sv = sweep_hinf(spectrum, Dynamics::velocity, FrequencyGrid::defaults(spectrum, Dynamics::velocity));
  out.push_back(check("velocity_sweep_vs_closed_form", std::abs(sv.peak_gain - hv) <= 5e-3 * hv,
                      "swept " + num(sv.peak_gain) + " vs " + num(hv)));
  const double hf = hinf_formation(spectrum);
  const auto sf = sweep_hinf(spectrum, Dynamics::formation, FrequencyGrid::defaults(spectrum, Dynamics::formation));
  out.push_back(check("formation_sweep_vs_closed_form", std::abs(sf.peak_gain - hf) <= 5e-3 * hf,
                      "swept " + num(sf.peak_gain) + " vs " + num(hf)));

  const auto fs = map_formation_spectrum(spectrum);
  if (gs.follower_count() <= 20) {
    const auto dense = eig_general(build_formation_matrix(gs));
    const double d = spectrum_distance(fs.values, dense);
    out.push_back(check("formation_matrix_spectrum", d <= 1e-7, "max matched distance " + num(d)));
  } else {
    out.push_back(check("formation_matrix_spectrum", true, "skipped: more than 20 followers"));
  }

  double worst_re = -std::numeric_limits<double>::infinity();
  for (const auto& v : fs.values) worst_re = std::max(worst_re, v.real());
  const double margin_floor = std::min(0.5 * spectrum.min(), 1.0);
  out.push_back(check("formation_margin_lower_bound", worst_re <= -margin_floor + 1e-9,
                      "max Re " + num(worst_re) + " vs -min(lambda_1/2, 1) " + num(-margin_floor) +
                          (worst_re <= -0.5 * spectrum.min() + 1e-9 ? "; lambda_1/2 form holds"
                                                                     : "; lambda_1/2 form fails")));

  const double defect = stochasticity_defect(gs);
  out.push_back(check("row_stochastic_steady_state", defect <= 1e-9, "defect " + num(defect)));

  const double tau = delay_margin_velocity(spectrum);
  const double d = gs.dmax_followers();
  out.push_back(check("delay_margin_bracket",
                      tau >= std::numbers::pi / (4 * d) - 1e-12 && tau <= std::numbers::pi / (2 * d) + 1e-12,
                      num(tau) + " in [pi/(4 dmax), pi/(2 dmax)]"));

  const auto md = md_arrangement(scenario.topology.n(), scenario.topology.k());
  if (scenario.refs == md) {
    out.push_back(check("md_velocity_nonexpansive", hv <= 1.0 + 1e-9, "||G||_inf = " + num(hv)));
    out.push_back(check("md_formation_bound", hf <= 2.0 / std::sqrt(3.0) + 1e-9, "||G||_inf = " + num(hf)));
  }
  return out;
}

void write_csv(const SweepResult& result, const Scenario& scenario, std::ostream& out) {
  scenario_header(scenario, out);
  out << "# baseline_hinf_velocity=";
  put_number(out, result.baseline_velocity);
  out << ", baseline_hinf_formation=";
  put_number(out, result.baseline_formation);
  out << '\n';
  out << result.variable << ",hinf_velocity,hinf_formation,lambda1\n";
  for (const auto& r : result.rows) {
    out << r.position << ',';
    put_hinf(out, r.hinf_velocity);
    out << ',';
    put_number(out, r.hinf_formation);
    out << ',';
    put_number(out, r.lambda1);
    out << '\n';
  }
}

void write_csv(const DelayGridResult& result, const Scenario& scenario, std::ostream& out) {
  scenario_header(scenario, out);
  out << "# seed=" << result.seed << ", pi_over_8k=";
  put_number(out, result.pi_over_8k);
  out << ", pi_over_2k=";
  put_number(out, result.pi_over_2k);
  out << ", quarter_over_k=";
  put_number(out, result.quarter_over_k);
  out << ", velocity_margin=";
  put_number(out, result.velocity_margin);
  out << ", formation_rho_bound=";
  put_number(out, result.formation_rho_bound);
  out << '\n';
  out << "tau,velocity_stable,velocity_ratio,formation_stable,formation_ratio,"
         "below_pi_8k,above_pi_2k,below_quarter_k,below_velocity_margin,below_formation_rho_bound\n";
  for (const auto& r : result.rows) {
    put_number(out, r.tau);
    out << ',' << (r.velocity.stable ? "stable" : "unstable") << ',';
    put_number(out, r.velocity.decay_ratio);
    out << ',' << (r.formation.stable ? "stable" : "unstable") << ',';
    put_number(out, r.formation.decay_ratio);
    out << ',' << (r.tau <= result.pi_over_8k) << ',' << (r.tau > result.pi_over_2k) << ','
        << (r.tau < result.quarter_over_k) << ',' << (r.tau < result.velocity_margin) << ','
        << (r.tau < result.formation_rho_bound) << '\n';
  }
}

void write_csv(const ScalingResult& result, std::ostream& out) {
  auto fit_line = [&](const char* name, const LogLogFit& f) {
    out << "# " << name << "_slope=";
    put_number(out, f.slope);
    out << ", excluded_smallest=" << (f.excluded_smallest ? "true" : "false") << '\n';
  };
  out << "# k=" << result.k << ", md_bounded=" << (result.md_bounded ? "true" : "false") << '\n';
  fit_line("single_velocity", result.single_velocity_fit);
  fit_line("single_formation", result.single_formation_fit);
  fit_line("md_velocity", result.md_velocity_fit);
  fit_line("md_formation", result.md_formation_fit);
  out << "n,single_hinf_velocity,single_hinf_formation,md_refs,md_hinf_velocity,md_hinf_formation\n";
  for (const auto& r : result.rows) {
    out << r.n << ',';
    put_number(out, r.single_velocity);
    out << ',';
    put_number(out, r.single_formation);
    out << ',' << r.md_refs << ',';
    put_number(out, r.md_velocity);
    out << ',';
    put_number(out, r.md_formation);
    out << '\n';
  }
}

}  // namespace platoon
