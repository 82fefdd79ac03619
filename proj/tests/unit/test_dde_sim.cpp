#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "platoon/dde_sim.hpp"
#include "platoon/errors.hpp"
#include "support.hpp"

using namespace platoon;
using std::numbers::pi;

namespace {

SimSystem scalar(double l) {
  Matrix lg(1, 1);
  lg(0, 0) = l;
  return SimSystem::from_lg(Dynamics::velocity, lg);
}

double max_rel_error(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return num / den;
}

}  // namespace

TEST(Simulate, ZeroDelayVelocityDecays) {
  const auto sys = SimSystem::velocity(support::p364_md());
  const auto x0 = random_state(sys.state_size(), 1);
  SimOptions opt;
  opt.horizon = 30.0;
  opt.step = 1e-3;
  const auto traj = simulate(sys, DelaySpec{0.0, DelayMode::none}, x0, opt);
  ASSERT_FALSE(traj.diverged);
  for (std::size_t i = 1; i < traj.norms.size(); ++i) ASSERT_LT(traj.norms[i], traj.norms[i - 1]);
  EXPECT_LT(traj.norms.back(), 1e-6 * traj.norms.front());
  EXPECT_DOUBLE_EQ(traj.times.back(), 30.0);
}

TEST(Simulate, EquilibriumStaysZero) {
  const auto sys = SimSystem::velocity(support::p52_ref3());
  SimOptions opt;
  opt.horizon = 5.0;
  const auto traj = simulate(sys, DelaySpec{0.3, DelayMode::full}, std::vector<double>(4, 0.0), opt);
  for (double v : traj.norms) EXPECT_EQ(v, 0.0);
  const auto verdict = classify(traj);
  EXPECT_TRUE(verdict.stable);
  EXPECT_EQ(verdict.decay_ratio, 0.0);
}

TEST(Simulate, ScalarDelayBeyondHalfPiGrows) {
  SimOptions opt;
  opt.horizon = 200.0;
  const auto traj = simulate(scalar(1.0), DelaySpec{2.0, DelayMode::full}, std::vector<double>{1.0}, opt);
  EXPECT_FALSE(classify(traj).stable);
  const auto calm = simulate(scalar(1.0), DelaySpec{1.2, DelayMode::full}, std::vector<double>{1.0}, opt);
  EXPECT_TRUE(classify(calm).stable);
}

TEST(Simulate, MatchesMatrixExponentialAtZeroDelay) {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    const auto inst = oracle::random_small_instance(rng, 8, 14, 4);
    const auto gs = support::ground(inst);
    const auto ref = oracle::ground(inst);
    for (Dynamics kind : {Dynamics::velocity, Dynamics::formation}) {
      const SimSystem sys = kind == Dynamics::velocity ? SimSystem::velocity(gs) : SimSystem::formation(gs);
      const auto x0 = random_state(sys.state_size(), 100 + trial);
      SimOptions opt;
      opt.horizon = 1.0;
      opt.step = 1e-3;
      const auto traj = simulate(sys, DelaySpec{0.0, DelayMode::none}, x0, opt);
      const auto gen = kind == Dynamics::velocity ? oracle::velocity_generator(ref.lg)
                                                  : oracle::formation_generator(ref.lg);
      const auto exact = oracle::apply(oracle::expm(gen), x0);
      ASSERT_LE(max_rel_error(traj.states.back(), exact), 1e-6);
    }
  }
}

TEST(Simulate, FourthOrderConvergence) {
  const auto gs = support::p52_ref3();
  const auto ref = oracle::ground(oracle::Instance{5, 2, {3}});
  for (Dynamics kind : {Dynamics::velocity, Dynamics::formation}) {
    const SimSystem sys = kind == Dynamics::velocity ? SimSystem::velocity(gs) : SimSystem::formation(gs);
    const auto x0 = random_state(sys.state_size(), 9);
    const auto gen =
        kind == Dynamics::velocity ? oracle::velocity_generator(ref.lg) : oracle::formation_generator(ref.lg);
    const auto exact = oracle::apply(oracle::expm(gen), x0);
    auto error = [&](double h) {
      SimOptions opt;
      opt.horizon = 1.0;
      opt.step = h;
      const auto traj = simulate(sys, DelaySpec{0.0, DelayMode::none}, x0, opt);
      double e = 0.0;
      for (std::size_t i = 0; i < exact.size(); ++i) e = std::max(e, std::abs(traj.states.back()[i] - exact[i]));
      return e;
    };
    const double ratio = error(1e-2) / error(5e-3);
    EXPECT_GE(ratio, 12.0) << to_string(kind);
    EXPECT_LE(ratio, 20.0) << to_string(kind);
  }
}

TEST(Simulate, DelayedRunConvergesWithStep) {
  // Successive halvings of the step shrink the change at least 8-fold.
  const auto sys = SimSystem::velocity(support::p52_ref3());
  const auto x0 = random_state(4, 3);
  auto final_state = [&](double h) {
    SimOptions opt;
    opt.horizon = 2.0;
    opt.step = h;
    return simulate(sys, DelaySpec{0.2, DelayMode::full}, x0, opt).states.back();
  };
  const auto a = final_state(0.02), b = final_state(0.01), c = final_state(0.005);
  double d1 = 0.0, d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d1 = std::max(d1, std::abs(a[i] - b[i]));
    d2 = std::max(d2, std::abs(b[i] - c[i]));
  }
  EXPECT_GT(d1 / d2, 6.0);
}

TEST(Simulate, Linearity) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 10; ++trial) {
    const auto gs = support::ground(oracle::random_small_instance(rng, 12, 20, 4));
    for (Dynamics kind : {Dynamics::velocity, Dynamics::formation}) {
      const SimSystem sys = kind == Dynamics::velocity ? SimSystem::velocity(gs) : SimSystem::formation(gs);
      const auto a = random_state(sys.state_size(), 2 * trial);
      const auto b = random_state(sys.state_size(), 2 * trial + 1);
      std::vector<double> ab(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) ab[i] = a[i] + b[i];
      SimOptions opt;
      opt.horizon = 3.0;
      opt.step = 5e-3;
      const DelaySpec d{0.05, DelayMode::full};
      const auto ta = simulate(sys, d, a, opt), tb = simulate(sys, d, b, opt), tab = simulate(sys, d, ab, opt);
      for (std::size_t s = 0; s < tab.states.size(); s += 50)
        for (std::size_t i = 0; i < ab.size(); ++i)
          ASSERT_NEAR(tab.states[s][i], ta.states[s][i] + tb.states[s][i], 1e-9);
    }
  }
}

TEST(Simulate, DelayRoundingIsReported) {
  SimOptions opt;
  opt.horizon = 1.0;
  opt.step = 0.01;
  const auto traj = simulate(scalar(1.0), DelaySpec{0.034, DelayMode::full}, std::vector<double>{1.0}, opt);
  EXPECT_DOUBLE_EQ(traj.tau_requested, 0.034);
  EXPECT_NEAR(traj.tau, 0.03, 1e-15);
  EXPECT_THROW(simulate(scalar(1.0), DelaySpec{0.004, DelayMode::full}, std::vector<double>{1.0}, opt),
               ParameterError);
  opt.horizon = 0.05;
  EXPECT_THROW(simulate(scalar(1.0), DelaySpec{0.0, DelayMode::none}, std::vector<double>{1.0}, opt),
               ParameterError);
  EXPECT_THROW(simulate(scalar(1.0), DelaySpec{0.0, DelayMode::none}, std::vector<double>{1.0, 2.0}),
               ParameterError);
}

TEST(Simulate, DefaultStepDividesDelay) {
  for (double tau : {0.09, 0.1, 0.4, 0.0137, 5.0, 1e-3}) {
    const double h = default_step(tau);
    EXPECT_LE(h, std::min(1e-3, tau / 40) * (1 + 1e-12));
    const double m = tau / h;
    EXPECT_NEAR(m, std::round(m), 1e-9) << tau;
  }
  EXPECT_DOUBLE_EQ(default_step(0.0), 1e-3);
}

TEST(Simulate, DivergenceTruncates) {
  SimOptions opt;
  opt.horizon = 500.0;
  const auto traj = simulate(scalar(1.0), DelaySpec{3.0, DelayMode::full}, std::vector<double>{1.0}, opt);
  EXPECT_TRUE(traj.diverged);
  EXPECT_LT(traj.times.back(), 500.0);
  EXPECT_FALSE(classify(traj).stable);
}

TEST(Simulate, DisturbanceIsDeterministicAndBounded) {
  const auto sys = SimSystem::formation(support::p52_ref3());
  SimOptions opt;
  opt.horizon = 20.0;
  opt.step = 1e-2;
  const std::vector<double> x0(sys.state_size(), 0.0);
  const auto noise = Disturbance::uniform_noise(0.5, 0.1, 77);
  const auto a = simulate(sys, DelaySpec{0.0, DelayMode::none}, x0, opt, noise);
  const auto b = simulate(sys, DelaySpec{0.0, DelayMode::none}, x0, opt, noise);
  EXPECT_EQ(a.norms, b.norms);
  EXPECT_EQ(a.disturbance_seed, std::optional<std::uint64_t>(77));
  EXPECT_GT(a.norms.back(), 0.0);
  for (double v : a.norms) EXPECT_LT(v, 10.0);

  const auto sine = simulate(sys, DelaySpec{0.0, DelayMode::none}, x0, opt, Disturbance::sinusoid(1.0, 0.7));
  EXPECT_FALSE(sine.disturbance_seed.has_value());
  EXPECT_GT(sine.norms.back(), 0.0);
}

TEST(Simulate, SpacingMustBeConsistent) {
  const auto gs = support::p52_ref3();
  Matrix good(5, 5), bad(5, 5);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      good(i, j) = 10.0 * (static_cast<double>(j) - static_cast<double>(i));
      bad(i, j) = good(i, j);
    }
  bad(0, 4) += 1.0;
  EXPECT_TRUE(is_consistent_spacing(good));
  EXPECT_FALSE(is_consistent_spacing(bad));
  EXPECT_NO_THROW(SimSystem::formation(gs, 1.0, 1.0, 1.0, good));
  EXPECT_THROW(SimSystem::formation(gs, 1.0, 1.0, 1.0, bad), ParameterError);
}

TEST(Simulate, SteadyStateVelocityTracksReference) {
  const auto sys = SimSystem::velocity(support::p52_ref3(), 20.0);
  for (double v : sys.steady_state_velocity()) EXPECT_NEAR(v, 20.0, 1e-12);
  const auto abs_state = sys.to_absolute(std::vector<double>(4, 0.0), 1.0);
  for (double v : abs_state) EXPECT_NEAR(v, 20.0, 1e-12);
}

TEST(Classify, VelocityStableAndUnstableDelays) {
  const auto sys = SimSystem::velocity(support::p364_md());
  const auto x0 = random_state(sys.state_size(), 1);
  SimOptions opt;
  opt.horizon = 100.0;
  opt.record_states = false;
  EXPECT_TRUE(classify(simulate(sys, DelaySpec{0.09, DelayMode::full}, x0, opt)).stable);
  EXPECT_FALSE(classify(simulate(sys, DelaySpec{0.4, DelayMode::full}, x0, opt)).stable);
}

TEST(Classify, EmptyTrajectoryIsRejected) {
  EXPECT_THROW(classify(Trajectory{}), ParameterError);
}

TEST(ThresholdScan, ScalarHalfPi) {
  ScanOptions opt;
  opt.horizon = 200.0;
  opt.max_step = 5e-3;
  const double crit = threshold_scan(scalar(1.0), 1.0, 2.5, 5e-3, opt);
  EXPECT_NEAR(crit, pi / 2, 0.02);
}

TEST(ThresholdScan, P52MatchesVelocityMargin) {
  ScanOptions opt;
  opt.horizon = 100.0;
  const auto sys = SimSystem::velocity(support::p52_ref3());
  const double crit = threshold_scan(sys, 0.2, 0.6, 2e-3, opt);
  EXPECT_NEAR(crit, 0.35583, 0.01);
}

TEST(ThresholdScan, RejectsUnorderedBracket) {
  EXPECT_THROW(threshold_scan(scalar(1.0), 2.0, 1.0, 1e-2), ParameterError);
  EXPECT_THROW(threshold_scan(scalar(1.0), 1.0, 1.0, 1e-2), ParameterError);
}

TEST(OffDiagonal, ZeroDelayMatchesUndelayedRun) {
  const auto sys = SimSystem::velocity(support::p52_ref3());
  const auto x0 = random_state(4, 5);
  SimOptions opt;
  opt.horizon = 3.0;
  opt.step = 1e-2;
  const auto a = simulate_offdiagonal(sys, 0.0, x0, opt);
  const auto b = simulate(sys, DelaySpec{0.0, DelayMode::none}, x0, opt);
  ASSERT_EQ(a.states.size(), b.states.size());
  for (std::size_t s = 0; s < a.states.size(); ++s)
    for (std::size_t i = 0; i < 4; ++i) ASSERT_NEAR(a.states[s][i], b.states[s][i], 1e-14);
}

TEST(OffDiagonal, LargeDelayStaysStable) {
  const auto sys = SimSystem::velocity(support::p52_ref3());
  const auto traj = simulate_offdiagonal(sys, 10.0, random_state(4, 6));
  EXPECT_TRUE(classify(traj).stable);
  EXPECT_THROW(simulate_offdiagonal(SimSystem::formation(support::p52_ref3()), 1.0, random_state(8, 1)),
               ParameterError);
}

TEST(TrajectoryCsv, HeaderAndColumns) {
  const auto sys = SimSystem::velocity(support::p52_ref3());
  SimOptions opt;
  opt.horizon = 0.5;
  opt.step = 0.05;
  const auto traj = simulate(sys, DelaySpec{0.1, DelayMode::full}, random_state(4, 2), opt);
  std::ostringstream os;
  write_csv(traj, TrajectoryMetadata{5, 2, 2}, os);
  std::istringstream in(os.str());
  std::string l1, l2, l3;
  std::getline(in, l1);
  std::getline(in, l2);
  std::getline(in, l3);
  EXPECT_EQ(l1.rfind("# n=5, k=2, tau=", 0), 0u);
  EXPECT_NE(l1.find("seed=2"), std::string::npos);
  EXPECT_NE(l2.find("history=constant"), std::string::npos);
  EXPECT_EQ(l3, "t,norm,x_1,x_2,x_3,x_4");
}

TEST(DelayModes, Parse) {
  EXPECT_EQ(parse_delay_mode("full"), DelayMode::full);
  EXPECT_EQ(parse_delay_mode(to_string(DelayMode::self_undelayed)), DelayMode::self_undelayed);
  EXPECT_THROW(parse_delay_mode("sideways"), ParameterError);
}

TEST(ThresholdScan, P364FormationCriticalDelayRespectsSufficientBounds) {
  const auto gs = support::p364_md();
  const auto s = eig_sym(gs.lg());
  const auto bounds = delay_margin_formation(s, 4);
  ScanOptions opt;
  opt.horizon = 100.0;
  const double crit = threshold_scan(SimSystem::formation(gs), 0.05, 0.4, 2e-3, opt);
  EXPECT_GT(crit, bounds.k_bound);
  EXPECT_GT(crit, bounds.rho_bound);
  EXPECT_LT(crit, delay_bounds_k(4).necessary);
}
