// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskmip/lp.h"

#include <gtest/gtest.h>

#include <cmath>

#include "test_util.h"

namespace deskmip {
namespace {

TEST(SolveLp, OneVariableClamp) {
  MilpInstance inst;
  inst.add_var(-kInf, kInf, 1.0, false, "x");
  SparseRow a, b;
  a.add(0, 1.0);
  b.add(0, 1.0);
  inst.add_row(a, RowSense::kGe, 3.0);
  inst.add_row(b, RowSense::kLe, 10.0);
  const auto res = solve_lp(inst);
  ASSERT_EQ(res.status, LpStatus::kOptimal);
  EXPECT_NEAR(res.x[0], 3.0, 1e-12);
  EXPECT_NEAR(res.objective, 3.0, 1e-12);
}

TEST(SolveLp, Triangle) {
  MilpInstance inst;
  inst.add_var(0, 1, -1, false);
  inst.add_var(0, 1, -1, false);
  SparseRow r;
  r.add(0, 1);
  r.add(1, 1);
  inst.add_row(r, RowSense::kLe, 1.0);
  const auto res = solve_lp(inst);
  ASSERT_EQ(res.status, LpStatus::kOptimal);
  EXPECT_NEAR(res.objective, -1.0, 1e-12);
  EXPECT_NEAR(res.x[0] + res.x[1], 1.0, 1e-12);
}

TEST(SolveLp, DetectsInfeasible) {
  MilpInstance inst;
  inst.add_var(0, 1, 1, false);
  SparseRow r;
  r.add(0, 1);
  inst.add_row(r, RowSense::kGe, 2.0);
  const auto res = solve_lp(inst);
  EXPECT_EQ(res.status, LpStatus::kInfeasible);
  EXPECT_GT(res.phase1_objective, 1e-7);
}

TEST(SolveLp, DetectsUnbounded) {
  MilpInstance inst;
  inst.add_var(0, kInf, -1, false);
  inst.add_var(0, kInf, 0, false);
  SparseRow r;
  r.add(0, 1);
  r.add(1, -1);
  inst.add_row(r, RowSense::kLe, 2.0);
  EXPECT_EQ(solve_lp(inst).status, LpStatus::kUnbounded);
}

TEST(SolveLp, IterationLimitIsReportedAsSuch) {
  const auto inst = testing::random_small_lp(4, 6, 6);
  const auto res = solve_lp(inst, 0);
  EXPECT_TRUE(res.status == LpStatus::kIterationLimit || res.iterations == 0);
}

TEST(SolveLp, MatchesVertexEnumeration) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = testing::random_small_lp(seed);
    const auto oracle = testing::vertex_enumeration_lp(inst);
    const auto res = solve_lp(inst);
    if (!oracle) {
      EXPECT_EQ(res.status, LpStatus::kInfeasible) << "seed " << seed;
      continue;
    }
    ASSERT_EQ(res.status, LpStatus::kOptimal) << "seed " << seed;
    EXPECT_NEAR(res.objective, *oracle, 1e-6) << "seed " << seed;
    const auto rep = check_feasibility(relax_all(inst), res.x, 1e-7);
    EXPECT_TRUE(rep.feasible) << "seed " << seed;
    EXPECT_NEAR(res.objective, inst.evaluate(res.x), 1e-9 * (1 + std::abs(res.objective)));
  }
}

TEST(SolveLp, ResolveIsBitwiseIdentical) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = testing::random_small_lp(seed);
    const auto a = solve_lp(inst);
    const auto b = solve_lp(inst);
    EXPECT_EQ(a.status, b.status);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.iterations, b.iterations);
  }
}

TEST(SolveLp, BlandRuleAgreesWithDantzig) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto inst = testing::random_small_lp(seed);
    LpOptions opts;
    opts.pivot_rule = PivotRule::kBland;
    const auto a = LpSolver(inst).solve(opts);
    const auto b = solve_lp(inst);
    ASSERT_EQ(a.status, b.status);
    if (a.status == LpStatus::kOptimal) EXPECT_NEAR(a.objective, b.objective, 1e-7);
  }
}

TEST(SolveLp, LowerBoundsBinaryOptimum) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto inst = testing::random_binary_milp(seed, 10, 8);
    const auto best = testing::enumerate_pure_integer(inst);
    const auto lp = solve_lp(inst);
    if (!best.feasible) continue;
    ASSERT_EQ(lp.status, LpStatus::kOptimal);
    EXPECT_LE(lp.objective, best.objective + 1e-9);
  }
}

TEST(SolveLp, ChargesTheClock) {
  const auto inst = testing::random_small_lp(2);
  SimulatedClock clock;
  LpOptions opts;
  opts.clock = &clock;
  const auto res = LpSolver(inst).solve(opts);
  EXPECT_DOUBLE_EQ(clock.now(), res.iterations * clock.costs().pivot_seconds);
}

// Tightening one bound of an optimal LP and re-solving from its basis must
// agree with the vertex oracle on the modified problem.
TEST(SolveLp, WarmStartAfterBoundChangeMatchesOracle) {
  int warm_used = 0, cases = 0;
  for (std::uint64_t seed = 0; seed < 600; ++seed) {
    auto inst = testing::random_small_lp(seed);
    const LpSolver solver(inst);
    const auto base = solver.solve();
    if (base.status != LpStatus::kOptimal) continue;
    const int j = static_cast<int>(seed % inst.num_vars());
    if (seed % 2 == 0)
      inst.upper[j] = std::floor(base.x[j] - 0.25);
    else
      inst.lower[j] = std::ceil(base.x[j] + 0.25);
    if (inst.lower[j] > inst.upper[j]) continue;
    const auto warm = solver.solve(inst.lower, inst.upper, {}, &base.basis);
    const auto cold = solver.solve(inst.lower, inst.upper);
    const auto oracle = testing::vertex_enumeration_lp(inst);
    warm_used += warm.warm_started;
    ++cases;
    if (!oracle) {
      EXPECT_EQ(warm.status, LpStatus::kInfeasible) << "seed " << seed;
      continue;
    }
    ASSERT_EQ(warm.status, LpStatus::kOptimal) << "seed " << seed;
    EXPECT_NEAR(warm.objective, *oracle, 1e-6) << "seed " << seed;
    EXPECT_NEAR(warm.objective, cold.objective, 1e-7) << "seed " << seed;
    EXPECT_TRUE(check_feasibility(relax_all(inst), warm.x, 1e-7).feasible) << "seed " << seed;
  }
  // Free nonbasic columns with a nonzero reduced cost force a cold start.
  EXPECT_GE(2 * warm_used, cases);
}

TEST(SolveLp, WarmStartFromOptimalBasisNeedsNoPivots) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = testing::random_small_lp(seed);
    const LpSolver solver(inst);
    const auto base = solver.solve();
    if (base.status != LpStatus::kOptimal) continue;
    const auto again = solver.solve(inst.lower, inst.upper, {}, &base.basis);
    ASSERT_EQ(again.status, LpStatus::kOptimal);
    EXPECT_TRUE(again.warm_started);
    EXPECT_EQ(again.iterations, 0) << "seed " << seed;
    EXPECT_NEAR(again.objective, base.objective, 1e-9);
  }
}

TEST(SolveLp, MalformedWarmBasisFallsBackToColdStart) {
  const auto inst = testing::random_small_lp(3);
  const LpSolver solver(inst);
  LpBasis bad;
  bad.head.assign(inst.num_rows(), 0);  // duplicate column
  bad.at_upper.assign(inst.num_vars() + inst.num_rows(), 0);
  const auto a = solver.solve(inst.lower, inst.upper, {}, &bad);
  const auto b = solver.solve(inst.lower, inst.upper);
  EXPECT_FALSE(a.warm_started);
  EXPECT_EQ(a.status, b.status);
  EXPECT_EQ(a.x, b.x);
}

}  // namespace
}  // namespace deskmip
