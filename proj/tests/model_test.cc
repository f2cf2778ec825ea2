// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskmip/model.h"

#include <gtest/gtest.h>

#include "deskmip/rng.h"
#include "test_util.h"

namespace deskmip {
namespace {

MilpInstance one_row(double coef, RowSense sense, double rhs) {
  MilpInstance inst;
  inst.add_var(0, 10, 1, true, "x");
  SparseRow r;
  r.add(0, coef);
  inst.add_row(r, sense, rhs, "c1");
  return inst;
}

TEST(CheckFeasibility, OriginIsFeasibleWithNonNegativeRhs) {
  MilpInstance inst = testing::random_binary_milp(3);
  for (auto& c : inst.constraints) {
    c.sense = RowSense::kLe;
    c.rhs = std::abs(c.rhs);
  }
  std::vector<double> x(inst.num_vars(), 0.0);
  const auto rep = check_feasibility(inst, x, 1e-9);
  EXPECT_TRUE(rep.feasible);
  EXPECT_EQ(rep.worst_constraint_violation, 0.0);
  EXPECT_EQ(rep.worst_integrality_violation, 0.0);
  EXPECT_EQ(rep.worst_bound_violation, 0.0);
}

TEST(CheckFeasibility, ReportsRowDeficit) {
  const auto inst = one_row(2.0, RowSense::kLe, 4.0);
  const auto rep = check_feasibility(inst, std::vector<double>{3.0}, 1e-9);
  EXPECT_FALSE(rep.feasible);
  EXPECT_DOUBLE_EQ(rep.worst_constraint_violation, 2.0);
  EXPECT_EQ(rep.worst_row, 0);
}

TEST(CheckFeasibility, IntegralityAndBounds) {
  const auto inst = one_row(1.0, RowSense::kGe, 0.0);
  auto rep = check_feasibility(inst, std::vector<double>{2.25}, 1e-6);
  EXPECT_DOUBLE_EQ(rep.worst_integrality_violation, 0.25);
  rep = check_feasibility(inst, std::vector<double>{11.0}, 1e-6);
  EXPECT_DOUBLE_EQ(rep.worst_bound_violation, 1.0);
}

TEST(CheckFeasibility, DimensionMismatchThrows) {
  const auto inst = one_row(1.0, RowSense::kLe, 1.0);
  EXPECT_THROW(check_feasibility(inst, std::vector<double>{1.0, 2.0}, 1e-6), ModelError);
}

TEST(CheckFeasibility, EnumeratedOptimumIsFeasible) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = testing::random_binary_milp(seed, 10, 8);
    const auto best = testing::enumerate_pure_integer(inst);
    if (!best.feasible) continue;
    EXPECT_TRUE(check_feasibility(inst, best.x, 1e-9).feasible);
  }
}

TEST(CheckFeasibility, MonotoneInTolerance) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = testing::random_binary_milp(trial, 8, 6);
    std::vector<double> x(inst.num_vars());
    for (auto& v : x) v = rng.uniform(-0.2, 1.2);
    const double t = rng.uniform(1e-6, 1.0);
    if (check_feasibility(inst, x, t).feasible)
      EXPECT_TRUE(check_feasibility(inst, x, t * 1.5).feasible);
  }
}

TEST(FixVariables, EmptyIsIdentity) {
  const auto inst = testing::random_binary_milp(5);
  EXPECT_EQ(fix_variables(inst, {}), inst);
}

TEST(FixVariables, SetsBothBounds) {
  const auto inst = testing::random_binary_milp(6);
  const auto out = fix_variables(inst, {{1, 1.0}});
  EXPECT_EQ(out.lower[1], 1.0);
  EXPECT_EQ(out.upper[1], 1.0);
  EXPECT_EQ(out.constraints, inst.constraints);
  EXPECT_EQ(out.objective, inst.objective);
}

TEST(FixVariables, RejectsOutOfBoundsAndFractional) {
  const auto inst = testing::random_binary_milp(7);
  EXPECT_THROW(fix_variables(inst, {{0, 2.0}}), ModelError);
  EXPECT_THROW(fix_variables(inst, {{0, 0.5}}), ModelError);
  EXPECT_THROW(fix_variables(inst, {{inst.num_vars(), 0.0}}), ModelError);
}

TEST(RelaxIntegrality, EmptyAndFull) {
  const auto inst = testing::random_binary_milp(8);
  EXPECT_EQ(relax_integrality(inst, {}), inst);
  std::set<int> all;
  for (int j = 0; j < inst.num_vars(); ++j) all.insert(j);
  EXPECT_EQ(relax_integrality(inst, all).num_int(), 0);
  EXPECT_THROW(relax_integrality(inst, {-1}), ModelError);
}

TEST(FixAndRelax, Commute) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = testing::random_binary_milp(seed);
    Rng rng(seed);
    std::map<int, double> fix;
    std::set<int> relax;
    for (int j = 0; j < inst.num_vars(); ++j) {
      if (rng.bernoulli(0.3)) fix[j] = static_cast<double>(rng.uniform_int(0, 1));
      if (rng.bernoulli(0.3)) relax.insert(j);
    }
    EXPECT_EQ(relax_integrality(fix_variables(inst, fix), relax),
              fix_variables(relax_integrality(inst, relax), fix));
  }
}

TEST(Validate, CatchesBrokenInstances) {
  auto inst = one_row(1.0, RowSense::kLe, 1.0);
  EXPECT_NO_THROW(inst.validate());
  auto dup = inst;
  dup.constraints[0].row.add(0, 2.0);
  EXPECT_THROW(dup.validate(), ModelError);
  auto range = inst;
  range.constraints[0].row.add(3, 2.0);
  EXPECT_THROW(range.validate(), ModelError);
  auto bounds = inst;
  bounds.lower[0] = 5;
  bounds.upper[0] = 4;
  EXPECT_THROW(bounds.validate(), ModelError);
}

TEST(AddRow, SortsIndices) {
  MilpInstance inst;
  for (int j = 0; j < 3; ++j) inst.add_var(0, 1, 0, false);
  SparseRow r;
  r.add(2, 3.0);
  r.add(0, 1.0);
  inst.add_row(r, RowSense::kEq, 1.0);
  EXPECT_EQ(inst.constraints[0].row.index, (std::vector<int>{0, 2}));
  EXPECT_EQ(inst.constraints[0].row.value, (std::vector<double>{1.0, 3.0}));
}

TEST(SolutionCache, MatchesRecomputedObjective) {
  const auto inst = testing::random_binary_milp(9);
  std::vector<double> x(inst.num_vars(), 1.0);
  const Solution sol(inst, x);
  EXPECT_NEAR(sol.objective, inst.evaluate(x), 1e-9 * (1 + std::abs(sol.objective)));
}

}  // namespace
}  // namespace deskmip
