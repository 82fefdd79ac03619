#include "platoon/dde_sim.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <limits>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include "platoon/errors.hpp"
#include "platoon/spectral.hpp"

namespace platoon {
namespace {

void put_number(std::ostream& out, double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, r.ptr - buf);
}

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// Right-hand side of the (possibly delayed) error dynamics.
class Rhs {
 public:
  Rhs(const SimSystem& sys, DelayMode mode)
      : kind_(sys.kind()), mode_(mode), kp_(sys.kp()), ku_(sys.ku()), m_(sys.follower_count()),
        lg_(BandMatrix::from_dense(sys.lg())), diag_(m_) {
    Matrix adj = sys.lg();
    for (std::size_t i = 0; i < m_; ++i) {
      diag_[i] = sys.lg()(i, i);
      for (std::size_t j = 0; j < m_; ++j) adj(i, j) = i == j ? 0.0 : -adj(i, j);
    }
    adj_ = BandMatrix::from_dense(adj);
  }

  // `x` is the current state, `xd` the delayed one (== x when mode is none).
  void operator()(std::span<const double> x, std::span<const double> xd, std::span<const double> w,
                  std::span<double> dx) const {
    std::fill(dx.begin(), dx.end(), 0.0);
    const bool self = mode_ == DelayMode::self_undelayed;
    if (kind_ == Dynamics::velocity) {
      if (self) {
        for (std::size_t i = 0; i < m_; ++i) dx[i] = -ku_ * diag_[i] * x[i];
        adj_.multiply_add(xd, dx, ku_);
      } else {
        lg_.multiply_add(xd, dx, -ku_);
      }
    } else {
      const auto p = x.subspan(0, m_);
      const auto v = x.subspan(m_, m_);
      const auto pd = xd.subspan(0, m_);
      const auto vd = xd.subspan(m_, m_);
      auto dp = dx.subspan(0, m_);
      auto dv = dx.subspan(m_, m_);
      if (self) {
        std::copy(v.begin(), v.end(), dp.begin());
        for (std::size_t i = 0; i < m_; ++i) dv[i] = -diag_[i] * (kp_ * p[i] + ku_ * v[i]);
        adj_.multiply_add(pd, dv, kp_);
        adj_.multiply_add(vd, dv, ku_);
      } else {
        std::copy(vd.begin(), vd.end(), dp.begin());
        lg_.multiply_add(pd, dv, -kp_);
        lg_.multiply_add(vd, dv, -ku_);
      }
    }
    if (!w.empty()) {
      auto target = kind_ == Dynamics::velocity ? dx : dx.subspan(m_, m_);
      for (std::size_t i = 0; i < m_; ++i) target[i] += w[i];
    }
  }

 private:
  Dynamics kind_;
  DelayMode mode_;
  double kp_;
  double ku_;
  std::size_t m_;
  BandMatrix lg_;
  BandMatrix adj_;
  std::vector<double> diag_;
};

// Last few stored samples; indices below zero read the constant pre-history.
class History {
 public:
  History(std::span<const double> x0, std::size_t delay_steps)
      : dim_(x0.size()), slots_(delay_steps + 4), x0_(x0.begin(), x0.end()), ring_(slots_ * dim_) {}

  void store(long long index, std::span<const double> x) {
    std::copy(x.begin(), x.end(), ring_.begin() + static_cast<std::ptrdiff_t>(slot(index) * dim_));
  }

  std::span<const double> at(long long index) const {
    if (index < 0) return x0_;
    return {ring_.data() + slot(index) * dim_, dim_};
  }

 private:
  std::size_t slot(long long index) const { return static_cast<std::size_t>(index) % slots_; }

  std::size_t dim_;
  std::size_t slots_;
  std::vector<double> x0_;
  std::vector<double> ring_;
};

// Cubic Lagrange weights for nodes 0..3 evaluated at u.
std::array<double, 4> lagrange_weights(double u) {
  return {-(u - 1) * (u - 2) * (u - 3) / 6.0, u * (u - 2) * (u - 3) / 2.0, -u * (u - 1) * (u - 3) / 2.0,
          u * (u - 1) * (u - 2) / 6.0};
}

}  // namespace

std::string to_string(DelayMode mode) {
  switch (mode) {
    case DelayMode::none: return "none";
    case DelayMode::full: return "full";
    case DelayMode::self_undelayed: return "self-undelayed";
  }
  return "none";
}

DelayMode parse_delay_mode(const std::string& s) {
  if (s == "none") return DelayMode::none;
  if (s == "full") return DelayMode::full;
  if (s == "self-undelayed" || s == "self_undelayed") return DelayMode::self_undelayed;
  throw ParameterError("unknown delay mode '" + s + "' (expected none, full or self-undelayed)");
}

SimSystem::SimSystem(Dynamics kind, Matrix lg, Matrix l12, double u_ref, double kp, double ku,
                     std::optional<Matrix> spacing, std::vector<VehicleIndex> followers)
    : kind_(kind), lg_(std::move(lg)), l12_(std::move(l12)), u_ref_(u_ref), kp_(kp), ku_(ku),
      spacing_(std::move(spacing)), followers_(std::move(followers)) {
  if (lg_.rows() == 0) throw ParameterError("SimSystem: empty Lg");
  if (!(kp_ > 0.0) || !(ku_ > 0.0)) throw ParameterError("SimSystem: gains must be positive");
  const Spectrum s = eig_sym(lg_);
  lambda1_ = s.min();
  lambda_max_ = s.max();
  for (std::size_t i = 0; i < lg_.rows(); ++i) max_diag_ = std::max(max_diag_, lg_(i, i));
}

SimSystem SimSystem::velocity(const GroundedSystem& gs, double u_ref, double ku) {
  return SimSystem(Dynamics::velocity, gs.lg_real(), gs.l12_real(), u_ref, 1.0, ku, std::nullopt,
                   {gs.followers().begin(), gs.followers().end()});
}

SimSystem SimSystem::formation(const GroundedSystem& gs, double u_ref, double kp, double ku,
                               std::optional<Matrix> spacing) {
  if (spacing) {
    const std::size_t n = gs.follower_count() + gs.reference_count();
    if (spacing->rows() != n || spacing->cols() != n) {
      throw ParameterError("SimSystem: spacing must be " + std::to_string(n) + "x" + std::to_string(n));
    }
    if (!is_consistent_spacing(*spacing)) {
      throw ParameterError("SimSystem: spacing violates Delta_ij = Delta_ik + Delta_kj");
    }
  }
  return SimSystem(Dynamics::formation, gs.lg_real(), gs.l12_real(), u_ref, kp, ku, std::move(spacing),
                   {gs.followers().begin(), gs.followers().end()});
}

SimSystem SimSystem::from_lg(Dynamics kind, const Matrix& lg, double kp, double ku) {
  if (!lg.square()) throw ParameterError("SimSystem: Lg is not square");
  if (asymmetry(lg) > 1e-12) throw ParameterError("SimSystem: Lg is not symmetric");
  std::vector<VehicleIndex> followers(lg.rows());
  for (std::size_t i = 0; i < followers.size(); ++i) followers[i] = static_cast<VehicleIndex>(i + 1);
  return SimSystem(kind, lg, Matrix(lg.rows(), 0), 0.0, kp, ku, std::nullopt, std::move(followers));
}

std::vector<double> SimSystem::steady_state_velocity() const {
  const Cholesky chol(lg_);
  std::vector<double> rhs(lg_.rows(), 0.0);
  for (std::size_t i = 0; i < l12_.rows(); ++i)
    for (std::size_t j = 0; j < l12_.cols(); ++j) rhs[i] -= l12_(i, j) * u_ref_;
  return chol.solve(rhs);
}

std::vector<double> SimSystem::to_absolute(std::span<const double> error_state, double t) const {
  if (error_state.size() != state_size()) throw ParameterError("to_absolute: state size mismatch");
  const auto uss = steady_state_velocity();
  const std::size_t m = follower_count();
  std::vector<double> out(error_state.begin(), error_state.end());
  if (kind_ == Dynamics::velocity) {
    for (std::size_t i = 0; i < m; ++i) out[i] += uss[i];
    return out;
  }
  for (std::size_t i = 0; i < m; ++i) {
    double offset = 0.0;
    if (spacing_) offset = (*spacing_)(static_cast<std::size_t>(followers_[i] - 1), 0);
    out[i] += u_ref_ * t + offset;
    out[m + i] += uss[i];
  }
  return out;
}

bool is_consistent_spacing(const Matrix& spacing, double tolerance) {
  if (!spacing.square()) return false;
  const std::size_t n = spacing.rows();
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(spacing(i, i)) > tolerance) return false;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        if (std::abs(spacing(i, j) - spacing(i, k) - spacing(k, j)) > tolerance) return false;
  }
  return true;
}

Disturbance Disturbance::zero() { return Disturbance(); }

Disturbance Disturbance::sinusoid(double amplitude, double omega) {
  if (!std::isfinite(amplitude) || !std::isfinite(omega)) throw ParameterError("Disturbance: non-finite parameter");
  Disturbance d;
  d.kind_ = Kind::sinusoid;
  d.amplitude_ = amplitude;
  d.omega_ = omega;
  return d;
}

Disturbance Disturbance::uniform_noise(double amplitude, double hold, std::uint64_t seed) {
  if (!std::isfinite(amplitude) || amplitude < 0.0) throw ParameterError("Disturbance: amplitude must be >= 0");
  if (!(hold > 0.0)) throw ParameterError("Disturbance: hold time must be positive");
  Disturbance d;
  d.kind_ = Kind::uniform_noise;
  d.amplitude_ = amplitude;
  d.hold_ = hold;
  d.seed_ = seed;
  return d;
}

std::string Disturbance::describe() const {
  switch (kind_) {
    case Kind::zero: return "zero";
    case Kind::sinusoid:
      return "sinusoid(amplitude=" + std::to_string(amplitude_) + ", omega=" + std::to_string(omega_) + ")";
    case Kind::uniform_noise:
      return "uniform_noise(amplitude=" + std::to_string(amplitude_) + ", hold=" + std::to_string(hold_) +
             ", seed=" + std::to_string(seed_) + ")";
  }
  return "zero";
}

Disturbance::Sampler Disturbance::sampler(std::size_t channels, double horizon) const {
  Sampler s;
  s.kind_ = kind_;
  s.amplitude_ = amplitude_;
  s.omega_ = omega_;
  s.hold_ = hold_;
  s.channels_ = channels;
  if (kind_ == Kind::uniform_noise) {
    const auto cells = static_cast<std::size_t>(std::floor(std::max(horizon, 0.0) / hold_)) + 2;
    std::mt19937_64 rng(seed_);
    std::uniform_real_distribution<double> dist(-amplitude_, amplitude_);
    s.table_.resize(cells * channels);
    for (double& v : s.table_) v = dist(rng);
  }
  return s;
}

void Disturbance::Sampler::sample(double t, std::span<double> out) const {
  switch (kind_) {
    case Kind::zero: std::fill(out.begin(), out.end(), 0.0); return;
    case Kind::sinusoid:
      for (std::size_t c = 0; c < out.size(); ++c) {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(out.size());
        out[c] = amplitude_ * std::sin(omega_ * t + phase);
      }
      return;
    case Kind::uniform_noise: {
      const std::size_t cells = table_.size() / channels_;
      const auto cell = std::min(static_cast<std::size_t>(std::max(t, 0.0) / hold_), cells - 1);
      std::copy_n(table_.begin() + static_cast<std::ptrdiff_t>(cell * channels_), out.size(), out.begin());
      return;
    }
  }
}

double default_step(double tau) {
  if (!(tau > 0.0)) return 1e-3;
  const double base = std::min(1e-3, tau / 40.0);
  return tau / std::ceil(tau / base - 1e-9);
}

double default_horizon(const SimSystem& sys, const DelaySpec& delay) {
  double h = 200.0 / sys.lambda1();
  if (delay.mode == DelayMode::self_undelayed && delay.tau > 0.0) h *= 1.0 + delay.tau * sys.max_self_weight();
  return std::min(h, 500.0);
}

Trajectory simulate(const SimSystem& sys, const DelaySpec& delay, std::span<const double> x0,
                    const SimOptions& options, const Disturbance& disturbance) {
  const std::size_t dim = sys.state_size();
  if (x0.size() != dim) {
    throw ParameterError("simulate: initial state has " + std::to_string(x0.size()) + " entries, expected " +
                         std::to_string(dim));
  }
  if (delay.tau < 0.0 || !std::isfinite(delay.tau)) throw ParameterError("simulate: tau must be finite and >= 0");

  const bool delayed = delay.mode != DelayMode::none && delay.tau > 0.0;
  const double step = options.step > 0.0 ? options.step : default_step(delayed ? delay.tau : 0.0);
  const double horizon = options.horizon > 0.0 ? options.horizon : default_horizon(sys, delay);
  if (horizon < 10.0 * step) throw ParameterError("simulate: horizon must be at least 10 steps");

  long long delay_steps = 0;
  if (delayed) {
    delay_steps = std::llround(delay.tau / step);
    if (delay_steps < 1) throw ParameterError("simulate: tau rounds to zero steps; reduce the step");
  }
  const DelayMode mode = delayed ? delay.mode : DelayMode::none;
  const auto nsteps = static_cast<long long>(std::llround(horizon / step));
  const std::size_t stride =
      options.record_stride > 0
          ? options.record_stride
          : std::max<std::size_t>(1, static_cast<std::size_t>((nsteps + kMaxAutoSamples - 1) / kMaxAutoSamples));

  Trajectory traj;
  traj.step = step;
  traj.record_stride = stride;
  traj.tau_requested = delay.tau;
  traj.tau = static_cast<double>(delay_steps) * step;
  traj.mode = mode;
  traj.kind = sys.kind();
  traj.disturbance_seed = disturbance.seed();

  const Rhs rhs(sys, mode);
  const auto w_sampler = disturbance.sampler(sys.follower_count(), horizon + step);
  const bool forced = disturbance.kind() != Disturbance::Kind::zero;
  std::vector<double> w(forced ? sys.follower_count() : 0);

  std::vector<double> x(x0.begin(), x0.end());
  std::vector<double> xs(dim), k1(dim), k2(dim), k3(dim), k4(dim), xd_half(dim);
  History history(x0, static_cast<std::size_t>(delay_steps));
  history.store(0, x);

  long long last_recorded = 0;
  auto record = [&](long long n, double nrm) {
    last_recorded = n;
    traj.times.push_back(static_cast<double>(n) * step);
    traj.norms.push_back(nrm);
    if (options.record_states) traj.states.push_back(x);
  };
  record(0, norm2(x));

  // Half-step delayed read at index n - delay_steps + 1/2. The history has a
  // slope jump at t = 0, so reads before it return x0 exactly and stencils
  // never reach across it; stencils are shifted back when the newest node
  // would lie in the future.
  const auto centered_weights = lagrange_weights(1.5);

  auto eval = [&](std::span<const double> state, std::span<const double> delayed_state, double t,
                  std::span<double> out) {
    if (forced) w_sampler.sample(t, w);
    rhs(state, delayed_state, w, out);
  };

  const double h = step;
  for (long long n = 0; n < nsteps; ++n) {
    const double t = static_cast<double>(n) * h;
    if (mode == DelayMode::none) {
      eval(x, x, t, k1);
      for (std::size_t i = 0; i < dim; ++i) xs[i] = x[i] + 0.5 * h * k1[i];
      eval(xs, xs, t + 0.5 * h, k2);
      for (std::size_t i = 0; i < dim; ++i) xs[i] = x[i] + 0.5 * h * k2[i];
      eval(xs, xs, t + 0.5 * h, k3);
      for (std::size_t i = 0; i < dim; ++i) xs[i] = x[i] + h * k3[i];
      eval(xs, xs, t + h, k4);
    } else {
      const long long base = n - delay_steps;
      if (base < 0) {
        const auto pre = history.at(-1);
        std::copy(pre.begin(), pre.end(), xd_half.begin());
      } else {
        long long j0 = std::max<long long>(base - 1, 0);
        if (j0 + 3 > n) j0 = n - 3;
        const auto weights = j0 == base - 1 ? centered_weights : lagrange_weights(static_cast<double>(base - j0) + 0.5);
        for (std::size_t i = 0; i < dim; ++i) {
          double v = 0.0;
          for (int q = 0; q < 4; ++q) v += weights[static_cast<std::size_t>(q)] * history.at(j0 + q)[i];
          xd_half[i] = v;
        }
      }
      eval(x, history.at(base), t, k1);
      for (std::size_t i = 0; i < dim; ++i) xs[i] = x[i] + 0.5 * h * k1[i];
      eval(xs, xd_half, t + 0.5 * h, k2);
      for (std::size_t i = 0; i < dim; ++i) xs[i] = x[i] + 0.5 * h * k2[i];
      eval(xs, xd_half, t + 0.5 * h, k3);
      for (std::size_t i = 0; i < dim; ++i) xs[i] = x[i] + h * k3[i];
      eval(xs, history.at(base + 1), t + h, k4);
    }
    for (std::size_t i = 0; i < dim; ++i) x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    history.store(n + 1, x);

    const double nrm = norm2(x);
    const bool blown = !std::isfinite(nrm) || nrm > kDivergenceNorm;
    if (blown || (n + 1) % static_cast<long long>(stride) == 0) record(n + 1, nrm);
    if (blown) {
      traj.diverged = true;
      break;
    }
  }
  // The final state is always kept, whatever the stride.
  if (!traj.diverged && last_recorded != nsteps) record(nsteps, norm2(x));
  return traj;
}

Trajectory simulate_offdiagonal(const SimSystem& sys, double tau, std::span<const double> x0,
                                const SimOptions& options) {
  if (sys.kind() != Dynamics::velocity) {
    throw ParameterError("simulate_offdiagonal: only defined for velocity-tracking dynamics");
  }
  return simulate(sys, DelaySpec{tau, DelayMode::self_undelayed}, x0, options);
}

StabilityVerdict classify(const Trajectory& trajectory, double threshold) {
  StabilityVerdict v;
  if (trajectory.times.empty()) throw ParameterError("classify: empty trajectory");
  v.horizon = trajectory.times.back();
  if (trajectory.diverged) {
    v.stable = false;
    v.decay_ratio = std::numeric_limits<double>::infinity();
    return v;
  }
  if (trajectory.times.size() < 8) throw ParameterError("classify: trajectory too short for the trailing window");

  const double end = trajectory.times.back();
  const double window_start = 0.75 * end;
  const double edge = 0.1 * (end - window_start);
  double head = 0.0;
  double tail = 0.0;
  for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
    const double t = trajectory.times[i];
    if (t >= window_start && t <= window_start + edge) head = std::max(head, trajectory.norms[i]);
    if (t >= end - edge) tail = std::max(tail, trajectory.norms[i]);
  }
  if (tail == 0.0) v.decay_ratio = 0.0;
  else if (head == 0.0) v.decay_ratio = std::numeric_limits<double>::infinity();
  else v.decay_ratio = tail / head;
  v.stable = v.decay_ratio < threshold;
  return v;
}

double threshold_scan(const SimSystem& sys, double tau_lo, double tau_hi, double tolerance,
                      const ScanOptions& options) {
  if (!(tau_lo >= 0.0) || !(tau_hi > tau_lo)) throw ParameterError("threshold_scan: need 0 <= tau_lo < tau_hi");
  if (!(tolerance > 0.0)) throw ParameterError("threshold_scan: tolerance must be positive");
  if (options.mode == DelayMode::none) throw ParameterError("threshold_scan: delay mode none has no threshold");

  const auto x0 = random_state(sys.state_size(), options.seed);
  auto stable_at = [&](double tau) {
    const DelaySpec delay{tau, options.mode};
    SimOptions so;
    so.horizon = options.horizon > 0.0 ? options.horizon : default_horizon(sys, delay);
    if (tau > 0.0) {
      const double base = std::min(options.max_step, tau / 40.0);
      so.step = tau / std::ceil(tau / base - 1e-9);
    } else {
      so.step = options.max_step;
    }
    so.record_stride = 1;
    so.record_states = false;
    return classify(simulate(sys, delay, x0, so), options.ratio_threshold).stable;
  };

  if (!stable_at(tau_lo) || stable_at(tau_hi)) {
    throw ParameterError("threshold_scan: bracket is not ordered (need stable at tau_lo, unstable at tau_hi)");
  }
  double lo = tau_lo;
  double hi = tau_hi;
  for (int it = 0; it < options.max_iterations && hi - lo >= tolerance; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (stable_at(mid)) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> random_state(std::size_t size, std::uint64_t seed, double amplitude) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  std::vector<double> x(size);
  for (double& v : x) v = dist(rng);
  return x;
}

void write_csv(const Trajectory& trajectory, const TrajectoryMetadata& meta, std::ostream& out) {
  out << "# n=" << meta.n << ", k=" << meta.k << ", tau=";
  put_number(out, trajectory.tau);
  out << ", step=";
  put_number(out, trajectory.step);
  out << ", seed=";
  if (meta.seed) out << *meta.seed;
  else out << "none";
  out << '\n';
  out << "# kind=" << to_string(trajectory.kind) << ", mode=" << to_string(trajectory.mode) << ", tau_requested=";
  put_number(out, trajectory.tau_requested);
  out << ", history=constant, stride=" << trajectory.record_stride
      << ", diverged=" << (trajectory.diverged ? "true" : "false") << '\n';

  const std::size_t dim = trajectory.states.empty() ? 0 : trajectory.states.front().size();
  out << "t,norm";
  for (std::size_t i = 1; i <= dim; ++i) out << ",x_" << i;
  out << '\n';
  for (std::size_t r = 0; r < trajectory.times.size(); ++r) {
    put_number(out, trajectory.times[r]);
    out << ',';
    put_number(out, trajectory.norms[r]);
    if (r < trajectory.states.size())
      for (double v : trajectory.states[r]) {
        out << ',';
        put_number(out, v);
      }
    out << '\n';
  }
}

}  // namespace platoon
