#pragma once

// Closed-form robustness metrics of the velocity-tracking (first-order) and
// formation (second-order) error dynamics, plus the frequency sweep that
// checks the closed forms independently.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "platoon/spectral.hpp"
#include "platoon/topology.hpp"

namespace platoon {

enum class Dynamics { velocity, formation };

std::string to_string(Dynamics d);
Dynamics parse_dynamics(const std::string& s);

/// An H-infinity gain that may be unbounded (no grounding, or a vacuous bound).
class HinfNorm {
 public:
  static HinfNorm finite(double value) { return HinfNorm(value); }
  static HinfNorm unbounded() { return HinfNorm(std::nullopt); }

  bool is_unbounded() const noexcept { return !value_; }
  /// Throws std::bad_optional_access when unbounded.
  double value() const { return value_.value(); }

  friend bool operator==(const HinfNorm&, const HinfNorm&) = default;

 private:
  explicit HinfNorm(std::optional<double> v) : value_(v) {}
  std::optional<double> value_;
};

inline constexpr double kGroundingTolerance = 1e-12;

/// 1 / lambda_1(Lg); unbounded when lambda_1 <= kGroundingTolerance.
HinfNorm hinf_velocity(const Spectrum& spectrum);

/// 1/max beta <= |F|/|boundary| <= ||G|| <= 1/min beta. The upper bound is
/// unbounded when some follower has no reference neighbor.
struct HinfVelocityBounds {
  double lower_max_beta = 0.0;
  double lower_boundary = 0.0;
  HinfNorm upper = HinfNorm::unbounded();
};
HinfVelocityBounds hinf_velocity_bounds(const GroundedSystem& gs);

/// Peak of |1 / ((jw)^2 + lambda jw + lambda)| over w:
///   2 / (lambda^{3/2} sqrt(4 - lambda))  for lambda <= 2,
///   1 / lambda                           otherwise.
double peak_amplitude(double lambda);

/// Max of peak_amplitude over every eigenvalue.
double hinf_formation(const Spectrum& spectrum);

class FrequencyGrid {
 public:
  /// `count` log-spaced points in [lo, hi], lo > 0.
  static FrequencyGrid logarithmic(double lo, double hi, std::size_t count);
  static FrequencyGrid from_points(std::vector<double> omegas);
  /// 4000 log points over [1e-4, 1e3] plus w = 0 (velocity) or the
  /// stationary points w^2 = lambda (1 - lambda / 2), lambda <= 2 (formation).
  static FrequencyGrid defaults(const Spectrum& spectrum, Dynamics dynamics);

  std::span<const double> omegas() const noexcept { return omegas_; }
  std::size_t size() const noexcept { return omegas_.size(); }

 private:
  explicit FrequencyGrid(std::vector<double> omegas);
  std::vector<double> omegas_;  // ascending, nonnegative, unique
};

struct FrequencyResponse {
  std::vector<double> omegas;
  std::vector<double> gains;
  double peak_omega = 0.0;
  double peak_gain = 0.0;
};

/// Largest singular value of G(jw) on the grid. Lg is symmetric, so the
/// transfer matrix diagonalizes with it and the gain reduces to
/// max_i 1/|jw + lambda_i| (velocity) or max_i 1/|-w^2 + lambda_i (1 + jw)|
/// (formation).
FrequencyResponse sweep_hinf(const Spectrum& spectrum, Dynamics dynamics, const FrequencyGrid& grid);
FrequencyResponse sweep_hinf(const GroundedSystem& gs, Dynamics dynamics, const FrequencyGrid& grid);

/// `omega,gain` rows with a header line.
void write_csv(const FrequencyResponse& response, std::ostream& out);

/// Reference-neighbor conditions for ||G||_inf < gamma (velocity dynamics).
struct GammaConditions {
  /// max beta > floor(1/gamma)
  bool necessary_ok = false;
  /// min beta > ceil(1/gamma), the literal strict form.
  bool sufficient_ok = false;
  /// min beta >= 1/gamma, which guarantees ||G||_inf <= gamma.
  bool sufficient_nonstrict_ok = false;
  /// The two sufficient forms disagree for this instance.
  bool strictness_gap = false;
};
GammaConditions gamma_conditions(const GroundedSystem& gs, double gamma);

/// ceil(n / (2k + 1))
int min_refs_nonexpansive(int n, int k);

/// pi / (2 lambda_max): the delayed first-order dynamics are stable iff tau is below it.
double delay_margin_velocity(const Spectrum& spectrum);

struct DelayBoundsK {
  double sufficient = 0.0;  // pi / (8k)
  double necessary = 0.0;   // pi / (2k)
};
DelayBoundsK delay_bounds_k(int k);

struct FormationDelayBounds {
  double rho_bound = 0.0;  // 1 / rho(B)
  double k_bound = 0.0;    // 1 / (4k)
};
FormationDelayBounds delay_margin_formation(const Spectrum& spectrum, int k);

/// Every closed-form metric for one platoon and reference placement.
struct RobustnessReport {
  int n = 0;
  int k = 0;
  std::vector<VehicleIndex> refs;
  std::vector<double> lg_spectrum;

  double lambda1 = 0.0;
  double lambda_max = 0.0;
  HinfNorm hinf_velocity = HinfNorm::unbounded();
  HinfVelocityBounds hinf_velocity_bounds;
  double hinf_formation = 0.0;
  double margin_velocity = 0.0;
  double margin_formation = 0.0;     // min |Re| over the formation spectrum
  double margin_formation_lb = 0.0;  // lambda_1 / 2
  // lambda_1 / 2 only bounds the margin while no eigenvalue above 4 has a
  // slow real root; min(lambda_1 / 2, 1) always does.
  bool margin_formation_lb_holds = false;
  double delay_velocity_max = 0.0;
  double delay_formation_sufficient = 0.0;  // 1 / rho(B)
  double delay_formation_k = 0.0;           // 1 / (4k)
  double delay_k_sufficient = 0.0;
  double delay_k_necessary = 0.0;
  double spectral_radius_formation = 0.0;
  int min_refs_nonexpansive = 0;
  double stochasticity_defect = 0.0;

  BoundCertificate lambda_min_certificate;
  BoundCertificate lambda_max_certificate;
  std::optional<double> gamma;
  std::optional<GammaConditions> gamma_conditions;
};

RobustnessReport analyze(const PlatoonTopology& topology, const ReferenceSet& refs,
                         std::optional<double> gamma = std::nullopt);

}  // namespace platoon
