#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "platoon/errors.hpp"
#include "platoon/robustness.hpp"
#include "support.hpp"

using namespace platoon;
using std::numbers::pi;

namespace {
Spectrum spec(std::vector<double> v) { return Spectrum{std::move(v), std::nullopt}; }
}  // namespace

TEST(HinfVelocity, Examples) {
  EXPECT_NEAR(hinf_velocity(eig_sym(support::p364_md().lg())).value(), 1.0, 1e-9);
  EXPECT_NEAR(hinf_velocity(eig_sym(support::p52_ref3().lg())).value(), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(hinf_velocity(spec({0.25, 3.0})).value(), 4.0);
  EXPECT_TRUE(hinf_velocity(spec({0.0, 1.0})).is_unbounded());
}

TEST(HinfVelocity, BoundsUnboundedWhenSomeFollowerLacksReference) {
  const auto gs = ground(build_platoon(4, 1), ReferenceSet::from_indices(4, {1}));
  const auto b = hinf_velocity_bounds(gs);
  EXPECT_TRUE(b.upper.is_unbounded());
  EXPECT_DOUBLE_EQ(b.lower_max_beta, 1.0);
  EXPECT_DOUBLE_EQ(b.lower_boundary, 3.0);
}

TEST(PeakAmplitude, Examples) {
  EXPECT_NEAR(peak_amplitude(2.0), 0.5, 1e-15);
  EXPECT_NEAR(2.0 / (std::pow(2.0, 1.5) * std::sqrt(2.0)), 0.5, 1e-15);
  EXPECT_NEAR(peak_amplitude(1.0), 2.0 / std::sqrt(3.0), 1e-15);
  EXPECT_DOUBLE_EQ(peak_amplitude(4.0), 0.25);
  EXPECT_THROW(peak_amplitude(0.0), ParameterError);
}

TEST(PeakAmplitude, ContinuousAndDecreasing) {
  EXPECT_NEAR(peak_amplitude(2.0 - 1e-12), peak_amplitude(2.0 + 1e-12), 1e-10);
  double prev = peak_amplitude(1.0);
  for (int i = 1; i <= 1000; ++i) {
    const double l = 1.0 + 3.0 * i / 1000.0;
    const double v = peak_amplitude(l);
    ASSERT_LT(v, prev) << l;
    prev = v;
  }
}

TEST(PeakAmplitude, MatchesNumericPeak) {
  for (double l : {0.05, 0.3, 1.0, 1.7, 2.0, 2.5, 4.0, 9.0}) {
    const double num = oracle::numeric_peak([&](double w) { return oracle::formation_gain({l}, w); });
    EXPECT_NEAR(peak_amplitude(l), num, 1e-9 * num) << l;
  }
}

TEST(HinfFormation, Examples) {
  EXPECT_NEAR(hinf_formation(eig_sym(support::p364_md().lg())), 2.0 / std::sqrt(3.0), 1e-9);
  const auto s = eig_sym(support::p52_ref3().lg());
  EXPECT_NEAR(hinf_formation(s), 2.0 / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(peak_amplitude(s.values[1]), 0.644, 1e-3);
  EXPECT_NEAR(peak_amplitude(s.values[2]), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(peak_amplitude(s.values[3]), 0.2265, 1e-4);
  EXPECT_DOUBLE_EQ(hinf_formation(spec({4.0})), 0.25);
}

TEST(Sweep, VelocityP52) {
  const auto s = eig_sym(support::p52_ref3().lg());
  const auto r = sweep_hinf(s, Dynamics::velocity, FrequencyGrid::logarithmic(1e-4, 1e3, 4000));
  EXPECT_NEAR(r.peak_gain, 1.0, 1e-4);
  EXPECT_LT(r.peak_omega, 1e-2);
  const auto dc = sweep_hinf(s, Dynamics::velocity, FrequencyGrid::from_points({0.0}));
  EXPECT_DOUBLE_EQ(dc.peak_gain, 1.0 / s.min());
}

TEST(Sweep, FormationP364PeakLocation) {
  const auto gs = support::p364_md();
  const auto s = eig_sym(gs.lg());
  const auto r = sweep_hinf(gs, Dynamics::formation, FrequencyGrid::defaults(s, Dynamics::formation));
  EXPECT_NEAR(r.peak_gain, 1.1547, 1e-3);
  EXPECT_NEAR(r.peak_omega, std::sqrt(0.5), 1e-6);
}

TEST(Sweep, GridValidationAndCsv) {
  EXPECT_THROW(FrequencyGrid::from_points({}), ParameterError);
  EXPECT_THROW(FrequencyGrid::from_points({-1.0}), ParameterError);
  const auto r = sweep_hinf(spec({1.0}), Dynamics::velocity, FrequencyGrid::from_points({1.0, 0.0}));
  ASSERT_EQ(r.omegas.size(), 2u);
  EXPECT_EQ(r.omegas[0], 0.0);
  std::ostringstream os;
  write_csv(r, os);
  EXPECT_EQ(os.str().substr(0, 11), "omega,gain\n");
}

TEST(SweepProperty, SweptPeakMatchesClosedForms) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 500; ++trial) {
    const auto s = eig_sym(support::ground(oracle::random_instance(rng, 60, 6)).lg());
    const auto rv = sweep_hinf(s, Dynamics::velocity, FrequencyGrid::defaults(s, Dynamics::velocity));
    const double hv = hinf_velocity(s).value();
    ASSERT_NEAR(rv.peak_gain, hv, 5e-3 * hv);
    const auto rf = sweep_hinf(s, Dynamics::formation, FrequencyGrid::defaults(s, Dynamics::formation));
    const double hf = hinf_formation(s);
    ASSERT_NEAR(rf.peak_gain, hf, 5e-3 * hf);
  }
}

TEST(HinfVelocityProperty, BetaAndBoundaryBounds) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const auto gs = support::ground(oracle::random_instance(rng, 60, 6));
    const double h = hinf_velocity(eig_sym(gs.lg())).value();
    const auto b = hinf_velocity_bounds(gs);
    ASSERT_LE(b.lower_max_beta, b.lower_boundary + 1e-12);
    ASSERT_LE(b.lower_boundary, h + 1e-9);
    if (gs.min_beta() == 0) ASSERT_TRUE(b.upper.is_unbounded());
    else ASSERT_LE(h, b.upper.value() + 1e-9);
  }
}

TEST(MdProperty, NonexpansiveUpTo300) {
  for (int k = 1; k <= 10; ++k) {
    for (int n = 2; n <= 300; n += 7) {
      const auto refs = md_arrangement(n, k);
      if (refs.followers().empty()) continue;
      const auto s = eig_sym(ground(build_platoon(n, k), refs).lg());
      ASSERT_LE(hinf_velocity(s).value(), 1.0 + 1e-9) << "n=" << n << " k=" << k;
      ASSERT_LE(hinf_formation(s), 2.0 / std::sqrt(3.0) + 1e-9);
    }
  }
}

TEST(GammaConditions, Examples) {
  const auto md = support::p364_md();
  const auto g = gamma_conditions(md, 1.01);
  EXPECT_TRUE(g.necessary_ok);
  // Literal strict form min beta > ceil(1/gamma) fails at min beta = 1 while
  // the non-strict form holds: the documented gap.
  const auto g1 = gamma_conditions(md, 1.0);
  EXPECT_FALSE(g1.sufficient_ok);
  EXPECT_TRUE(g1.sufficient_nonstrict_ok);
  EXPECT_TRUE(g1.strictness_gap);
  const auto p41 = ground(build_platoon(4, 1), ReferenceSet::from_indices(4, {1}));
  EXPECT_FALSE(gamma_conditions(p41, 0.5).necessary_ok);
  EXPECT_THROW(gamma_conditions(p41, 0.0), ParameterError);
}

TEST(GammaConditionsProperty, MonotoneInGammaAndSound) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 200; ++trial) {
    const auto gs = support::ground(oracle::random_instance(rng, 40, 5));
    const double h = hinf_velocity(eig_sym(gs.lg())).value();
    bool prev_nec = false, prev_suf = false, prev_nonstrict = false;
    for (double gamma = 0.05; gamma < 4.0; gamma *= 1.1) {
      const auto g = gamma_conditions(gs, gamma);
      ASSERT_TRUE(!prev_nec || g.necessary_ok);
      ASSERT_TRUE(!prev_suf || g.sufficient_ok);
      ASSERT_TRUE(!prev_nonstrict || g.sufficient_nonstrict_ok);
      prev_nec = g.necessary_ok;
      prev_suf = g.sufficient_ok;
      prev_nonstrict = g.sufficient_nonstrict_ok;
      if (g.sufficient_ok) ASSERT_LT(h, gamma);
      if (g.sufficient_nonstrict_ok) ASSERT_LE(h, gamma + 1e-9);
      if (h < gamma) ASSERT_TRUE(g.necessary_ok);
    }
  }
}

TEST(MinRefs, Examples) {
  EXPECT_EQ(min_refs_nonexpansive(36, 4), 4);
  EXPECT_EQ(min_refs_nonexpansive(5, 2), 1);
  EXPECT_EQ(min_refs_nonexpansive(37, 4), 5);
}

TEST(DelayMargins, Examples) {
  EXPECT_NEAR(delay_margin_velocity(eig_sym(support::p52_ref3().lg())), pi / (2 * (3 + std::sqrt(2.0))), 1e-12);
  EXPECT_NEAR(pi / (2 * (3 + std::sqrt(2.0))), 0.35583, 1e-4);
  EXPECT_DOUBLE_EQ(delay_margin_velocity(spec({pi / 2})), 1.0);
  const double m = delay_margin_velocity(eig_sym(support::p364_md().lg()));
  EXPECT_GE(m, pi / 32);
  EXPECT_LE(m, pi / 16);

  const auto k4 = delay_bounds_k(4);
  EXPECT_DOUBLE_EQ(k4.sufficient, pi / 32);
  EXPECT_DOUBLE_EQ(k4.necessary, pi / 8);
  EXPECT_DOUBLE_EQ(delay_bounds_k(1).sufficient, pi / 8);
  EXPECT_DOUBLE_EQ(delay_bounds_k(2).necessary, pi / 4);

  EXPECT_DOUBLE_EQ(delay_margin_formation(eig_sym(support::p364_md().lg()), 4).k_bound, 0.0625);
  EXPECT_NEAR(delay_margin_formation(eig_sym(support::p52_ref3().lg()), 2).rho_bound, 1.0 / 2.8829, 1e-4);
  const auto f4 = delay_margin_formation(spec({4.0}), 1);
  EXPECT_DOUBLE_EQ(f4.rho_bound, 0.5);
  EXPECT_DOUBLE_EQ(f4.k_bound, 0.25);
}

TEST(DelayMarginsProperty, VelocityMarginBracket) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    const auto gs = support::ground(oracle::random_instance(rng, 60, 6));
    const double m = delay_margin_velocity(eig_sym(gs.lg()));
    const double d = gs.dmax_followers();
    ASSERT_GE(m, pi / (4 * d) - 1e-12);
    ASSERT_LE(m, pi / (2 * d) + 1e-12);
  }
}

TEST(DelayMarginsProperty, RhoBoundAtLeastKBoundOnMd) {
  for (int k = 1; k <= 8; ++k) {
    for (int n = 2 * k + 2; n <= 150; n += 5) {
      const auto s = eig_sym(ground(build_platoon(n, k), md_arrangement(n, k)).lg());
      const auto f = delay_margin_formation(s, k);
      ASSERT_GE(f.rho_bound, f.k_bound) << "n=" << n << " k=" << k;
    }
  }
}

TEST(Report, P364Md) {
  const auto r = analyze(build_platoon(36, 4), md_arrangement(36, 4), 1.01);
  EXPECT_NEAR(r.lambda1, 1.0, 1e-9);
  EXPECT_NEAR(r.hinf_velocity.value(), 1.0, 1e-9);
  EXPECT_NEAR(r.hinf_formation, 2.0 / std::sqrt(3.0), 1e-9);
  EXPECT_EQ(r.min_refs_nonexpansive, 4);
  EXPECT_NEAR(r.delay_velocity_max, pi / (2 * r.lambda_max), 1e-15);
  EXPECT_NEAR(r.margin_velocity, 1.0, 1e-9);
  EXPECT_NEAR(r.margin_formation, 0.5, 1e-9);
  EXPECT_NEAR(r.margin_formation_lb, 0.5, 1e-9);
  EXPECT_TRUE(r.lambda_min_certificate.holds);
  EXPECT_TRUE(r.lambda_max_certificate.holds);
  ASSERT_TRUE(r.gamma_conditions.has_value());
  EXPECT_TRUE(r.gamma_conditions->necessary_ok);
  EXPECT_EQ(r.lg_spectrum.size(), 32u);
}

TEST(Report, P52MatchesHandValues) {
  const auto r = analyze(build_platoon(5, 2), ReferenceSet::from_indices(5, {3}));
  EXPECT_NEAR(r.lambda1, 1.0, 1e-12);
  EXPECT_NEAR(r.lambda_max, 3.0 + std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(r.hinf_velocity.value(), 1.0, 1e-12);
  EXPECT_NEAR(r.hinf_formation, 2.0 / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(r.delay_velocity_max, pi / (2 * (3 + std::sqrt(2.0))), 1e-12);
  const double lmax = 3.0 + std::sqrt(2.0);
  const double rho = 0.5 * lmax * (1.0 + std::sqrt(1.0 - 4.0 / lmax));
  EXPECT_NEAR(r.spectral_radius_formation, rho, 1e-12);
  EXPECT_NEAR(r.delay_formation_sufficient, 1.0 / rho, 1e-12);
  EXPECT_DOUBLE_EQ(r.delay_formation_k, 0.125);
  EXPECT_EQ(r.min_refs_nonexpansive, 1);
  EXPECT_LE(r.stochasticity_defect, 1e-10);
}
