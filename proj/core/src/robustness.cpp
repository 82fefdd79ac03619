#include "platoon/robustness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>

#include "platoon/errors.hpp"

namespace platoon {

std::string to_string(Dynamics d) { return d == Dynamics::velocity ? "velocity" : "formation"; }

Dynamics parse_dynamics(const std::string& s) {
  if (s == "velocity") return Dynamics::velocity;
  if (s == "formation") return Dynamics::formation;
  throw ParameterError("unknown dynamics '" + s + "' (expected velocity or formation)");
}

HinfNorm hinf_velocity(const Spectrum& spectrum) {
  const double lambda1 = spectrum.min();
  if (lambda1 <= kGroundingTolerance) return HinfNorm::unbounded();
  return HinfNorm::finite(1.0 / lambda1);
}

HinfVelocityBounds hinf_velocity_bounds(const GroundedSystem& gs) {
  HinfVelocityBounds b;
  const int max_beta = gs.max_beta();
  b.lower_max_beta = max_beta > 0 ? 1.0 / max_beta : 0.0;
  b.lower_boundary = gs.boundary_size() > 0
                         ? static_cast<double>(gs.follower_count()) / static_cast<double>(gs.boundary_size())
                         : 0.0;
  const int min_beta = gs.min_beta();
  b.upper = min_beta > 0 ? HinfNorm::finite(1.0 / min_beta) : HinfNorm::unbounded();
  return b;
}

double peak_amplitude(double lambda) {
  if (!(lambda > 0.0)) throw ParameterError("peak_amplitude: lambda must be positive");
  if (lambda <= 2.0) return 2.0 / (std::pow(lambda, 1.5) * std::sqrt(4.0 - lambda));
  return 1.0 / lambda;
}

double hinf_formation(const Spectrum& spectrum) {
  if (spectrum.values.empty()) throw ParameterError("hinf_formation: empty spectrum");
  double worst = 0.0;
  for (double lambda : spectrum.values) worst = std::max(worst, peak_amplitude(lambda));
  return worst;
}

FrequencyGrid::FrequencyGrid(std::vector<double> omegas) : omegas_(std::move(omegas)) {}

FrequencyGrid FrequencyGrid::from_points(std::vector<double> omegas) {
  if (omegas.empty()) throw ParameterError("FrequencyGrid: empty grid");
  for (double w : omegas)
    if (!std::isfinite(w) || w < 0.0) throw ParameterError("FrequencyGrid: frequencies must be finite and >= 0");
  std::sort(omegas.begin(), omegas.end());
  omegas.erase(std::unique(omegas.begin(), omegas.end()), omegas.end());
  return FrequencyGrid(std::move(omegas));
}

FrequencyGrid FrequencyGrid::logarithmic(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo)) throw ParameterError("FrequencyGrid::logarithmic: need 0 < lo <= hi");
  if (count == 0) throw ParameterError("FrequencyGrid: empty grid");
  std::vector<double> w(count);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    w[i] = std::pow(10.0, a + f * (b - a));
  }
  return from_points(std::move(w));
}

FrequencyGrid FrequencyGrid::defaults(const Spectrum& spectrum, Dynamics dynamics) {
  auto base = logarithmic(1e-4, 1e3, 4000);
  std::vector<double> w(base.omegas().begin(), base.omegas().end());
  if (dynamics == Dynamics::velocity) {
    w.push_back(0.0);
  } else {
    for (double lambda : spectrum.values)
      if (lambda > 0.0 && lambda <= 2.0) w.push_back(std::sqrt(lambda * (1.0 - 0.5 * lambda)));
  }
  return from_points(std::move(w));
}

FrequencyResponse sweep_hinf(const Spectrum& spectrum, Dynamics dynamics, const FrequencyGrid& grid) {
  if (grid.size() == 0) throw ParameterError("sweep_hinf: empty grid");
  if (spectrum.values.empty()) throw ParameterError("sweep_hinf: empty spectrum");
  if (!(spectrum.min() > 0.0)) throw ParameterError("sweep_hinf: lambda_1 must be positive");

  FrequencyResponse fr;
  fr.omegas.assign(grid.omegas().begin(), grid.omegas().end());
  fr.gains.reserve(fr.omegas.size());
  for (double w : fr.omegas) {
    double gain = 0.0;
    for (double lambda : spectrum.values) {
      const double mag = dynamics == Dynamics::velocity ? std::hypot(w, lambda)
                                                        : std::hypot(lambda - w * w, lambda * w);
      gain = std::max(gain, 1.0 / mag);
    }
    fr.gains.push_back(gain);
    if (gain > fr.peak_gain) {
      fr.peak_gain = gain;
      fr.peak_omega = w;
    }
  }
  return fr;
}

FrequencyResponse sweep_hinf(const GroundedSystem& gs, Dynamics dynamics, const FrequencyGrid& grid) {
  return sweep_hinf(eig_sym(gs.lg()), dynamics, grid);
}

void write_csv(const FrequencyResponse& response, std::ostream& out) {
  out << "omega,gain\n";
  char buf[64];
  for (std::size_t i = 0; i < response.omegas.size(); ++i) {
    auto r = std::to_chars(buf, buf + sizeof buf, response.omegas[i]);
    out.write(buf, r.ptr - buf);
    out << ',';
    r = std::to_chars(buf, buf + sizeof buf, response.gains[i]);
    out.write(buf, r.ptr - buf);
    out << '\n';
  }
}

GammaConditions gamma_conditions(const GroundedSystem& gs, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ParameterError("gamma_conditions: gamma must be positive");
  const double inv = 1.0 / gamma;
  GammaConditions c;
  c.necessary_ok = gs.max_beta() > std::floor(inv);
  c.sufficient_ok = gs.min_beta() > std::ceil(inv);
  c.sufficient_nonstrict_ok = static_cast<double>(gs.min_beta()) * gamma >= 1.0 - 1e-12;
  c.strictness_gap = c.sufficient_ok != c.sufficient_nonstrict_ok;
  return c;
}

int min_refs_nonexpansive(int n, int k) {
  if (n < 1 || k < 1) throw ParameterError("min_refs_nonexpansive: need n >= 1 and k >= 1");
  return (n + 2 * k) / (2 * k + 1);
}

double delay_margin_velocity(const Spectrum& spectrum) {
  const double lambda_max = spectrum.max();
  if (!(lambda_max > 0.0)) throw ParameterError("delay_margin_velocity: lambda_max must be positive");
  return std::numbers::pi / (2.0 * lambda_max);
}

DelayBoundsK delay_bounds_k(int k) {
  if (k < 1) throw ParameterError("delay_bounds_k: need k >= 1");
  return {std::numbers::pi / (8.0 * k), std::numbers::pi / (2.0 * k)};
}

FormationDelayBounds delay_margin_formation(const Spectrum& spectrum, int k) {
  if (k < 1) throw ParameterError("delay_margin_formation: need k >= 1");
  const double rho = spectral_radius_formation(map_formation_spectrum(spectrum));
  return {1.0 / rho, 1.0 / (4.0 * k)};
}

RobustnessReport analyze(const PlatoonTopology& topology, const ReferenceSet& refs, std::optional<double> gamma) {
  const GroundedSystem gs = ground(topology, refs);
  const Spectrum spectrum = eig_sym(gs.lg());
  const FormationSpectrum fs = map_formation_spectrum(spectrum);

  RobustnessReport r;
  r.n = topology.n();
  r.k = topology.k();
  r.refs.assign(refs.refs().begin(), refs.refs().end());
  r.lg_spectrum = spectrum.values;
  r.lambda1 = spectrum.min();
  r.lambda_max = spectrum.max();
  r.hinf_velocity = hinf_velocity(spectrum);
  r.hinf_velocity_bounds = hinf_velocity_bounds(gs);
  r.hinf_formation = hinf_formation(spectrum);
  r.margin_velocity = r.lambda1;
  r.margin_formation = std::abs(fs.values.front().real());
  for (const auto& v : fs.values) r.margin_formation = std::min(r.margin_formation, std::abs(v.real()));
  r.margin_formation_lb = 0.5 * r.lambda1;
  r.margin_formation_lb_holds = r.margin_formation >= r.margin_formation_lb - 1e-9;
  r.delay_velocity_max = delay_margin_velocity(spectrum);
  const auto fb = delay_margin_formation(spectrum, topology.k());
  r.delay_formation_sufficient = fb.rho_bound;
  r.delay_formation_k = fb.k_bound;
  const auto kb = delay_bounds_k(topology.k());
  r.delay_k_sufficient = kb.sufficient;
  r.delay_k_necessary = kb.necessary;
  r.spectral_radius_formation = spectral_radius_formation(fs);
  r.min_refs_nonexpansive = min_refs_nonexpansive(topology.n(), topology.k());
  r.stochasticity_defect = stochasticity_defect(gs);
  r.lambda_min_certificate = certify_lambda_min(gs, spectrum);
  r.lambda_max_certificate = certify_lambda_max(gs, spectrum);
  if (gamma) {
    r.gamma = gamma;
    r.gamma_conditions = gamma_conditions(gs, *gamma);
  }
  return r;
}

}  // namespace platoon
