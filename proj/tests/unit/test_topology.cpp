#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "platoon/errors.hpp"
#include "platoon/topology.hpp"
#include "support.hpp"

using namespace platoon;

TEST(Topology, P52EdgesAndDegrees) {
  const auto t = build_platoon(5, 2);
  const std::vector<Edge> expected{{1, 2}, {1, 3}, {2, 3}, {2, 4}, {3, 4}, {3, 5}, {4, 5}};
  EXPECT_EQ(t.edges(), expected);
  EXPECT_EQ(t.degrees(), (std::vector<int>{2, 3, 4, 3, 2}));
}

TEST(Topology, LineAndCompleteGraphs) {
  EXPECT_EQ(build_platoon(3, 1).degrees(), (std::vector<int>{1, 2, 1}));
  const auto k4 = build_platoon(4, 5);
  EXPECT_EQ(k4.degrees(), (std::vector<int>{3, 3, 3, 3}));
  EXPECT_EQ(k4.edges().size(), 6u);
}

TEST(Topology, RejectsBadParameters) {
  EXPECT_THROW(build_platoon(1, 1), ParameterError);
  EXPECT_THROW(build_platoon(5, 0), ParameterError);
}

TEST(Topology, DegreeFormulaMatchesEnumeration) {
  for (int n = 2; n <= 200; n += (n < 30 ? 1 : 17)) {
    for (int k = 1; k <= 12; ++k) {
      const auto t = build_platoon(n, k);
      const auto a = oracle::adjacency(n, k);
      for (int i = 1; i <= n; ++i) {
        int count = 0;
        for (int j = 0; j < n; ++j) count += a[i - 1][j];
        ASSERT_EQ(t.degree(i), count) << "n=" << n << " k=" << k << " i=" << i;
        ASSERT_EQ(count, std::min(i - 1, k) + std::min(n - i, k));
      }
    }
  }
}

TEST(Topology, MdArrangementExamples) {
  auto as_vec = [](const ReferenceSet& r) { return std::vector<int>(r.refs().begin(), r.refs().end()); };
  EXPECT_EQ(as_vec(md_arrangement(36, 4)), (std::vector<int>{5, 14, 23, 32}));
  EXPECT_EQ(as_vec(md_arrangement(5, 2)), (std::vector<int>{3}));
  EXPECT_EQ(as_vec(md_arrangement(10, 2)), (std::vector<int>{3, 8}));
  // Trailing segment [10..12] of length 3 puts its reference at 11; [10..11] at 10.
  EXPECT_EQ(as_vec(md_arrangement(12, 4)), (std::vector<int>{5, 11}));
  EXPECT_EQ(as_vec(md_arrangement(11, 4)), (std::vector<int>{5, 10}));
}

TEST(Topology, MdArrangementCountAndCoverage) {
  for (int n = 2; n <= 120; ++n) {
    for (int k = 1; k <= 8; ++k) {
      const auto refs = md_arrangement(n, k);
      ASSERT_EQ(static_cast<int>(refs.refs().size()), (n + 2 * k) / (2 * k + 1));
      if (refs.followers().empty()) continue;
      const auto gs = ground(build_platoon(n, k), refs);
      ASSERT_GE(gs.min_beta(), 1) << "n=" << n << " k=" << k;
    }
  }
}

TEST(Topology, ReferenceSetValidation) {
  EXPECT_THROW(ReferenceSet::from_indices(5, {}), ParameterError);
  EXPECT_THROW(ReferenceSet::from_indices(5, {0}), ParameterError);
  EXPECT_THROW(ReferenceSet::from_indices(5, {6}), ParameterError);
  EXPECT_THROW(ReferenceSet::from_indices(5, {2, 2}), ParameterError);
  const auto r = ReferenceSet::from_indices(5, {4, 1});
  EXPECT_EQ(std::vector<int>(r.refs().begin(), r.refs().end()), (std::vector<int>{1, 4}));
  EXPECT_EQ(std::vector<int>(r.followers().begin(), r.followers().end()), (std::vector<int>{2, 3, 5}));
  EXPECT_THROW(r.with_removed(2), ParameterError);
  EXPECT_THROW(r.with_added(1), ParameterError);
}

TEST(Topology, GroundP52AtThree) {
  const auto gs = support::p52_ref3();
  const IntMatrix& lg = gs.lg();
  const std::vector<std::int64_t> diag{2, 3, 3, 2};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(lg(i, i), diag[i]);
    if (i + 1 < 4) EXPECT_EQ(lg(i, i + 1), -1);
  }
  EXPECT_EQ(lg(0, 2), 0);
  EXPECT_EQ(std::vector<int>(gs.betas().begin(), gs.betas().end()), (std::vector<int>{1, 1, 1, 1}));
  EXPECT_EQ(gs.boundary_size(), 4);
}

TEST(Topology, GroundP364Md) {
  const auto gs = support::p364_md();
  EXPECT_EQ(gs.follower_count(), 32u);
  for (int b : gs.betas()) EXPECT_EQ(b, 1);
  EXPECT_EQ(gs.boundary_size(), 32);
  EXPECT_EQ(gs.dmax_followers(), 8);
}

TEST(Topology, GroundP31AtOne) {
  const auto gs = ground(build_platoon(3, 1), ReferenceSet::from_indices(3, {1}));
  EXPECT_EQ(gs.lg()(0, 0), 2);
  EXPECT_EQ(gs.lg()(0, 1), -1);
  EXPECT_EQ(gs.lg()(1, 1), 1);
  EXPECT_EQ(gs.l12()(0, 0), -1);
  EXPECT_EQ(gs.l12()(1, 0), 0);
}

TEST(Topology, GroundRejectsAllReferences) {
  const auto t = build_platoon(3, 1);
  EXPECT_THROW(ground(t, ReferenceSet::from_indices(3, {1, 2, 3})), ParameterError);
  EXPECT_THROW(ground(t, ReferenceSet::from_indices(4, {1})), ParameterError);
}

TEST(TopologyProperty, GroundingMatchesDeletionOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const auto inst = oracle::random_instance(rng, 40, 6);
    const auto gs = support::ground(inst);
    const auto ref = oracle::ground(inst);
    ASSERT_EQ(gs.follower_count(), ref.followers.size());
    int beta_sum = 0;
    for (std::size_t i = 0; i < ref.followers.size(); ++i) {
      std::int64_t row = 0;
      for (std::size_t j = 0; j < ref.followers.size(); ++j) {
        ASSERT_EQ(gs.lg()(i, j), static_cast<std::int64_t>(ref.lg[i][j]));
        row += gs.lg()(i, j);
      }
      for (std::size_t r = 0; r < inst.refs.size(); ++r) row += gs.l12()(i, r);
      ASSERT_EQ(row, 0);
      ASSERT_EQ(gs.betas()[i], ref.betas[i]);
      beta_sum += gs.betas()[i];
    }
    ASSERT_EQ(gs.boundary_size(), beta_sum);
    ASSERT_EQ(gs.dmax_followers(), ref.dmax);
  }
}
