// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskmip/generators.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "deskmip/lp.h"
#include "deskmip/mps.h"

namespace deskmip {
namespace {

ItemPlacementParams tiny_item_params() {
  ItemPlacementParams p;
  p.items = 2;
  p.containers = 2;
  p.dims = 1;
  p.big_item_count = 0;
  p.seed = 3;
  return p;
}

TEST(ItemPlacement, TinyCounts) {
  const auto g = gen_item_placement(tiny_item_params());
  EXPECT_EQ(g.inst.num_vars(), 7);
  EXPECT_EQ(g.inst.num_rows(), 8);
  EXPECT_EQ(g.inst.num_int(), 4);
  EXPECT_EQ(g.view.roles.size(), 7u);
}

TEST(ItemPlacement, RowsEncodeTheModel) {
  const auto g = gen_item_placement(tiny_item_params());
  const auto& d = g.view.item;
  for (int i = 0; i < d.items; ++i) {
    const auto& c = g.inst.constraints[d.assignment_row(i)];
    EXPECT_EQ(c.sense, RowSense::kEq);
    EXPECT_EQ(c.rhs, 1.0);
    for (int j = 0; j < d.containers; ++j) {
      const auto& cap = g.inst.constraints[d.knapsack_row(j, 0)];
      EXPECT_EQ(cap.sense, RowSense::kLe);
      EXPECT_EQ(cap.rhs, d.capacity[0]);
    }
  }
  for (int j = 0; j < d.containers; ++j) {
    const auto& dy = g.inst.constraints[d.define_y_row(j, 0)];
    EXPECT_EQ(dy.sense, RowSense::kGe);
    EXPECT_EQ(dy.rhs, 1.0);
    const auto& dz = g.inst.constraints[d.define_z_row(j, 0)];
    EXPECT_EQ(dz.sense, RowSense::kLe);
    EXPECT_EQ(dz.rhs, 0.0);
    EXPECT_EQ(dz.row.index, (std::vector<int>{d.y(j, 0), d.z(0)}));
  }
  EXPECT_EQ(g.inst.objective[d.y(1, 0)], d.alpha[0]);
  EXPECT_EQ(g.inst.objective[d.z(0)], d.beta[0]);
  EXPECT_NO_THROW(validate_structure(g.inst, g.view));
}

TEST(ItemPlacement, DefaultPlantsFiveBigItems) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ItemPlacementParams p;
    p.seed = seed;
    const auto g = gen_item_placement(p);
    const auto& d = g.view.item;
    EXPECT_EQ(g.inst.num_vars(), 105 * 10 + 10 * 2 + 2);
    std::set<int> big;
    for (int i = 0; i < d.items; ++i)
      for (int k = 0; k < d.dims; ++k)
        if (d.a(i, k) > d.capacity[k] / 2) big.insert(i);
    EXPECT_EQ(big.size(), 5u);
    EXPECT_EQ(big, std::set<int>(d.planted_big.begin(), d.planted_big.end()));
  }
}

TEST(ItemPlacement, TrivialBoundIsAFeasiblePoint) {
  ItemPlacementParams p;
  p.seed = 11;
  const auto g = gen_item_placement(p);
  ASSERT_EQ(static_cast<int>(g.view.trivial_solution.size()), g.inst.num_vars());
  EXPECT_TRUE(check_feasibility(g.inst, g.view.trivial_solution, 1e-6).feasible);
  EXPECT_DOUBLE_EQ(g.inst.evaluate(g.view.trivial_solution), g.view.trivial_bound);
}

TEST(ItemPlacement, RejectsTooManyBigItems) {
  ItemPlacementParams p;
  p.big_item_count = 6;
  EXPECT_THROW(gen_item_placement(p), GenerationError);
}

TEST(Generators, SameSeedSameBytes) {
  ItemPlacementParams ip;
  ip.seed = 4;
  EXPECT_EQ(write_mps(gen_item_placement(ip).inst), write_mps(gen_item_placement(ip).inst));
  WorkloadParams wp;
  wp.seed = 4;
  EXPECT_EQ(write_mps(gen_workload(wp).inst), write_mps(gen_workload(wp).inst));
  TimeIndexedParams tp;
  tp.seed = 4;
  EXPECT_EQ(write_mps(gen_time_indexed(tp).inst), write_mps(gen_time_indexed(tp).inst));
  tp.seed = 5;
  const auto other = write_mps(gen_time_indexed(tp).inst);
  tp.seed = 4;
  EXPECT_NE(other, write_mps(gen_time_indexed(tp).inst));
}

TEST(Generators, MpsAndSidecarRoundTrip) {
  WorkloadParams wp;
  wp.seed = 2;
  const auto g = gen_workload(wp);
  EXPECT_TRUE(approx_equal(parse_mps(write_mps(g.inst)), g.inst, 1e-12));
  EXPECT_EQ(view_from_json(to_json(g.view)), g.view);
  TimeIndexedParams tp;
  const auto t = gen_time_indexed(tp);
  EXPECT_EQ(view_from_json(to_json(t.view)), t.view);
}

TEST(Generators, ParamsJsonRoundTrip) {
  ItemPlacementParams ip;
  ip.items = 17;
  ip.seed = 99;
  ItemPlacementParams ip2;
  from_json(to_json(ip), ip2);
  EXPECT_EQ(to_json(ip2), to_json(ip));
  WorkloadParams wp;
  wp.density = 0.25;
  WorkloadParams wp2;
  from_json(to_json(wp), wp2);
  EXPECT_EQ(to_json(wp2), to_json(wp));
}

TEST(Workload, SmallestRobustCase) {
  WorkloadParams p;
  p.tasks = 1;
  p.machines = 2;
  p.workloads = {1.0};
  p.capacities = {3.0, 3.0};
  p.access = {{0, 1}};
  const auto g = gen_workload(p);
  const auto& d = g.view.work;
  ASSERT_EQ(d.robust_rows.size(), 2u);
  for (int r : d.robust_rows) {
    const auto& c = g.inst.constraints[r];
    EXPECT_EQ(c.sense, RowSense::kGe);
    EXPECT_EQ(c.rhs, 1.0);
    EXPECT_EQ(c.row.size(), 1u);  // the surviving machine carries the task alone
  }
  std::set<int> survivors;
  for (int r : d.robust_rows) survivors.insert(g.inst.constraints[r].row.index[0]);
  EXPECT_EQ(survivors, std::set<int>(d.x_var[0].begin(), d.x_var[0].end()));
}

TEST(Workload, GeneratedStructure) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    WorkloadParams p;
    p.seed = seed;
    const auto g = gen_workload(p);
    const auto& d = g.view.work;
    std::size_t pairs = 0;
    for (int i = 0; i < d.tasks; ++i) {
      EXPECT_GE(d.access[i].size(), 2u);
      pairs += d.access[i].size();
      for (int j : d.access[i]) EXPECT_LT(d.workload[i], d.capacity[j]);
    }
    EXPECT_EQ(d.robust_rows.size(), pairs);
    EXPECT_EQ(d.define_x_rows.size(), pairs);
    EXPECT_EQ(static_cast<int>(d.capacity_rows.size()), d.machines);
    EXPECT_EQ(solve_lp(relax_all(g.inst)).status, LpStatus::kOptimal);
    EXPECT_TRUE(check_feasibility(g.inst, g.view.trivial_solution, 1e-6).feasible);
    EXPECT_EQ(g.view.trivial_bound, d.machines);
  }
}

TEST(TimeIndexed, WindowAndTrivialPoint) {
  TimeIndexedParams p;
  p.horizon = 3;
  p.window = 1;
  p.seed = 8;
  const auto g = gen_time_indexed(p);
  const auto& per = g.view.time.period;
  for (const auto& c : g.inst.constraints) {
    bool has1 = false, has3 = false;
    for (int j : c.row.index) {
      has1 |= per[j] == 1;
      has3 |= per[j] == 3;
    }
    EXPECT_FALSE(has1 && has3);
  }
  EXPECT_TRUE(check_feasibility(g.inst, g.inst.lower, 1e-9).feasible);
  EXPECT_EQ(g.view.trivial_bound, 0.0);
  for (int j = 0; j < g.inst.num_vars(); ++j)
    if (g.inst.is_integer[j]) EXPECT_TRUE(per[j] >= 1 && per[j] <= 3);
}

// Planted and recovered labels agree up to direction.
int label_error(const std::vector<int>& planted, const std::vector<int>& found, int H,
                const MilpInstance& inst) {
  int fwd = 0, rev = 0;
  for (int j = 0; j < inst.num_vars(); ++j) {
    if (!inst.is_integer[j]) continue;
    fwd = std::max(fwd, std::abs(found[j] - planted[j]));
    rev = std::max(rev, std::abs(found[j] - (H + 1 - planted[j])));
  }
  return std::min(fwd, rev);
}

TEST(RecoverPeriods, ChainIsExact) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    TimeIndexedParams p;
    p.horizon = 5;
    p.window = 1;
    p.seed = seed;
    const auto g = gen_time_indexed(p);
    const auto rec = recover_periods(g.inst);
    EXPECT_FALSE(rec.disconnected);
    EXPECT_EQ(rec.num_periods, 5);
    EXPECT_EQ(label_error(g.view.time.period, rec.period, 5, g.inst), 0) << "seed " << seed;
  }
}

TEST(RecoverPeriods, SinglePeriod) {
  TimeIndexedParams p;
  p.horizon = 1;
  const auto g = gen_time_indexed(p);
  const auto rec = recover_periods(g.inst);
  for (int j = 0; j < g.inst.num_vars(); ++j)
    if (g.inst.is_integer[j]) EXPECT_EQ(rec.period[j], 1);
}

TEST(RecoverPeriods, WideWindowWithinOne) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    TimeIndexedParams p;
    p.horizon = 4;
    p.window = 2;
    p.seed = seed;
    const auto g = gen_time_indexed(p);
    const auto rec = recover_periods(g.inst);
    EXPECT_LE(label_error(g.view.time.period, rec.period, 4, g.inst), 1) << "seed " << seed;
  }
}

TEST(RecoverPeriods, DisconnectedIsFlagged) {
  MilpInstance inst;
  for (int j = 0; j < 4; ++j) inst.add_var(0, 1, 0, true);
  SparseRow a, b;
  a.add(0, 1);
  a.add(1, 1);
  b.add(2, 1);
  b.add(3, 1);
  inst.add_row(a, RowSense::kLe, 1);
  inst.add_row(b, RowSense::kLe, 1);
  EXPECT_TRUE(recover_periods(inst).disconnected);
}

}  // namespace
}  // namespace deskmip
