#pragma once

// Fixed-step simulation of the velocity-tracking and formation error dynamics
// with a constant communication delay, and the stable/unstable classifier used
// to reproduce delay experiments.
//
// Integration is classical RK4 on a uniform grid. Delayed states are read
// from a history buffer; the delay is rounded to a whole number of steps so
// that delayed reads at t and t + h land on stored samples, and the half-step
// read is a cubic Lagrange interpolation over the four nearest samples. The
// history before t = 0 is the constant initial state.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "platoon/matrix.hpp"
#include "platoon/robustness.hpp"
#include "platoon/topology.hpp"

namespace platoon {

enum class DelayMode {
  none,            // x' = A x(t)
  full,            // x' = A x(t - tau)
  self_undelayed,  // own state undelayed: x' = -D x(t) + Adj x(t - tau)
};

std::string to_string(DelayMode mode);
DelayMode parse_delay_mode(const std::string& s);

struct DelaySpec {
  double tau = 0.0;
  DelayMode mode = DelayMode::none;
};

/// Error-coordinate dynamics of the followers.
class SimSystem {
 public:
  static SimSystem velocity(const GroundedSystem& gs, double u_ref = 0.0, double ku = 1.0);
  static SimSystem formation(const GroundedSystem& gs, double u_ref = 0.0, double kp = 1.0, double ku = 1.0,
                             std::optional<Matrix> spacing = std::nullopt);
  /// Bare system from a symmetric positive definite Lg (no reference coupling).
  static SimSystem from_lg(Dynamics kind, const Matrix& lg, double kp = 1.0, double ku = 1.0);

  Dynamics kind() const noexcept { return kind_; }
  const Matrix& lg() const noexcept { return lg_; }
  const Matrix& l12() const noexcept { return l12_; }
  double u_ref() const noexcept { return u_ref_; }
  double kp() const noexcept { return kp_; }
  double ku() const noexcept { return ku_; }
  /// Desired spacing Delta_ij over all n vehicles (display only).
  const std::optional<Matrix>& spacing() const noexcept { return spacing_; }

  std::size_t follower_count() const noexcept { return lg_.rows(); }
  std::size_t state_size() const noexcept {
    return kind_ == Dynamics::velocity ? lg_.rows() : 2 * lg_.rows();
  }
  double lambda1() const noexcept { return lambda1_; }
  double lambda_max() const noexcept { return lambda_max_; }
  /// Largest diagonal entry of Lg (the largest follower degree).
  double max_self_weight() const noexcept { return max_diag_; }

  /// -Lg^{-1} L12 u_ref 1; equals u_ref on every follower.
  std::vector<double> steady_state_velocity() const;

  /// Maps an error state back to absolute follower velocities (velocity
  /// kind) or [positions; velocities] with p*_i(t) = u_ref t + Delta_{i,1}.
  std::vector<double> to_absolute(std::span<const double> error_state, double t) const;

 private:
  SimSystem(Dynamics kind, Matrix lg, Matrix l12, double u_ref, double kp, double ku, std::optional<Matrix> spacing,
            std::vector<VehicleIndex> followers);

  Dynamics kind_;
  Matrix lg_;
  Matrix l12_;
  double u_ref_;
  double kp_;
  double ku_;
  std::optional<Matrix> spacing_;
  std::vector<VehicleIndex> followers_;
  double lambda1_ = 0.0;
  double lambda_max_ = 0.0;
  double max_diag_ = 0.0;
};

/// Checks Delta_ii = 0 and Delta_ij = Delta_ik + Delta_kj to `tolerance`.
bool is_consistent_spacing(const Matrix& spacing, double tolerance = 1e-9);

/// Bounded disturbance w(t) entering the velocity (or velocity-error) rows.
class Disturbance {
 public:
  enum class Kind { zero, sinusoid, uniform_noise };

  static Disturbance zero();
  /// Channel c receives amplitude * sin(omega t + 2 pi c / channels).
  static Disturbance sinusoid(double amplitude, double omega);
  /// Independent uniform values in [-amplitude, amplitude] per channel, held
  /// for `hold` seconds; the table is drawn from a std::mt19937_64 seeded with `seed`.
  static Disturbance uniform_noise(double amplitude, double hold, std::uint64_t seed);

  Kind kind() const noexcept { return kind_; }
  double amplitude() const noexcept { return amplitude_; }
  double omega() const noexcept { return omega_; }
  double hold() const noexcept { return hold_; }
  std::optional<std::uint64_t> seed() const noexcept {
    return kind_ == Kind::uniform_noise ? std::optional(seed_) : std::nullopt;
  }
  std::string describe() const;

  /// Samples for `channels` signals over [0, horizon].
  class Sampler {
   public:
    void sample(double t, std::span<double> out) const;

   private:
    friend class Disturbance;
    Kind kind_ = Kind::zero;
    double amplitude_ = 0.0;
    double omega_ = 0.0;
    double hold_ = 1.0;
    std::size_t channels_ = 0;
    std::vector<double> table_;  // uniform_noise: cells x channels
  };
  Sampler sampler(std::size_t channels, double horizon) const;

 private:
  Disturbance() = default;
  Kind kind_ = Kind::zero;
  double amplitude_ = 0.0;
  double omega_ = 0.0;
  double hold_ = 1.0;
  std::uint64_t seed_ = 0;
};

struct SimOptions {
  /// <= 0 selects default_horizon().
  double horizon = 0.0;
  /// <= 0 selects default_step().
  double step = 0.0;
  /// Record every n-th step; 0 keeps at most kMaxAutoSamples samples.
  std::size_t record_stride = 0;
  bool record_states = true;
};

inline constexpr std::size_t kMaxAutoSamples = 20000;
inline constexpr double kDivergenceNorm = 1e12;

/// min(1e-3, tau / 40), shrunk so that it divides tau exactly.
double default_step(double tau);
/// 200 / lambda_1 capped at 500. In self_undelayed mode the slow mode decays
/// roughly (1 + tau d_max) times slower, so the horizon is stretched by that factor.
double default_horizon(const SimSystem& sys, const DelaySpec& delay);

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;  // empty when states were not recorded
  std::vector<double> norms;
  bool diverged = false;
  double step = 0.0;
  std::size_t record_stride = 1;
  double tau_requested = 0.0;
  double tau = 0.0;  // delay actually simulated (rounded to whole steps)
  DelayMode mode = DelayMode::none;
  Dynamics kind = Dynamics::velocity;
  std::optional<std::uint64_t> disturbance_seed;
};

/// Throws ParameterError on invalid sizes or a delay shorter than half a step.
/// A state whose norm exceeds kDivergenceNorm (or is not finite) truncates the
/// run and sets `diverged`.
Trajectory simulate(const SimSystem& sys, const DelaySpec& delay, std::span<const double> x0,
                    const SimOptions& options = {}, const Disturbance& disturbance = Disturbance::zero());

/// Velocity dynamics with undelayed self terms: u' = -D_g u(t) + A_g u(t - tau).
Trajectory simulate_offdiagonal(const SimSystem& sys, double tau, std::span<const double> x0,
                                const SimOptions& options = {});

struct StabilityVerdict {
  bool stable = false;
  double decay_ratio = 0.0;
  double horizon = 0.0;
};

inline constexpr double kStableDecayRatio = 0.2;

/// Over the trailing 25% of the run, compares the peak norm in the last tenth
/// of that window with the peak norm in its first tenth (peaks rather than
/// point values so oscillating modes are not caught at a zero crossing).
/// Stable iff the ratio is below `threshold`; 0/0 counts as 0; divergence is unstable.
StabilityVerdict classify(const Trajectory& trajectory, double threshold = kStableDecayRatio);

struct ScanOptions {
  DelayMode mode = DelayMode::full;
  /// <= 0 selects default_horizon().
  double horizon = 0.0;
  double max_step = 1e-3;
  /// Growth-neutral threshold; 0.2 would bias the critical delay low.
  double ratio_threshold = 1.0;
  std::uint64_t seed = 1;
  int max_iterations = 60;
};

/// Bisection on tau between a stable lower and unstable upper delay until the
/// bracket is narrower than `tolerance`; returns the bracket midpoint.
double threshold_scan(const SimSystem& sys, double tau_lo, double tau_hi, double tolerance,
                      const ScanOptions& options = {});

/// Uniform entries in [-amplitude, amplitude] from std::mt19937_64(seed).
std::vector<double> random_state(std::size_t size, std::uint64_t seed, double amplitude = 1.0);

struct TrajectoryMetadata {
  int n = 0;
  int k = 0;
  std::optional<std::uint64_t> seed;
};

/// `# key=value` metadata lines, then `t,norm,x_1,...,x_m`.
void write_csv(const Trajectory& trajectory, const TrajectoryMetadata& meta, std::ostream& out);

}  // namespace platoon
