// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskmip/tuner.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <set>

#include "deskmip/lp.h"
#include "deskmip/metrics.h"
#include "deskmip/rng.h"

namespace deskmip {
namespace {

// Four informative parameters plus one the objective never reads.
ParamSpace synthetic_space() {
  ParamSpace s;
  s.params = {ParamDef::real("a", 0.0, 1.0, 0.5),
              ParamDef::integer("b", 1, 20, 10),
              ParamDef::categorical("c", {"x", "y", "z"}, "x"),
              ParamDef::real("d", 1e-3, 1.0, 0.1, true),
              ParamDef::real("noop", 0.0, 1.0, 0.5)};
  s.partition = {{0, 1}, {2, 3, 4}};
  s.subspace_names = {"first", "second"};
  return s;
}

double synthetic_objective(const Config& c) {
  const double a = c["a"].get<double>();
  const double b = c["b"].get<double>();
  const std::string cat = c["c"].get<std::string>();
  const double d = c["d"].get<double>();
  return 4.0 * (a - 0.8) * (a - 0.8) + 0.05 * std::abs(b - 3.0) + (cat == "z" ? 0.0 : 1.0) +
         0.3 * std::abs(std::log10(d) + 2.0);
}

std::vector<Generated> item_corpus(int count, int items, int containers, std::uint64_t seed0) {
  std::vector<Generated> out;
  for (int s = 0; s < count; ++s) {
    ItemPlacementParams p;
    p.items = items;
    p.containers = containers;
    p.big_item_count = 1;
    p.seed = seed0 + s;
    out.push_back(gen_item_placement(p));
  }
  return out;
}

TEST(DefaultSpace, FifteenParametersInFourSubspaces) {
  const auto s = default_space();
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.params.size(), 15u);
  EXPECT_EQ(s.partition.size(), 4u);
  std::multiset<int> covered;
  for (const auto& b : s.partition) covered.insert(b.begin(), b.end());
  for (int i = 0; i < 15; ++i) EXPECT_EQ(covered.count(i), 1u);
}

TEST(DefaultSpace, DefaultsReproduceTheUnconfiguredSolver) {
  const auto setup = apply_config(default_space().defaults());
  const auto g = item_corpus(1, 12, 3, 40)[0];
  BnbConfig plain;
  plain.time_limit = 3.0;
  BnbConfig configured = setup.bnb;
  configured.time_limit = 3.0;
  SimulatedClock c1, c2;
  const auto a = solve(g.inst, plain, std::nullopt, &c1);
  const auto b = solve(g.inst, configured, std::nullopt, &c2);
  EXPECT_EQ(a.nodes, b.nodes);
  EXPECT_EQ(a.lp_iterations, b.lp_iterations);
  ASSERT_EQ(a.timeline.events.size(), b.timeline.events.size());
  for (std::size_t i = 0; i < a.timeline.events.size(); ++i) {
    EXPECT_EQ(a.timeline.events[i].t, b.timeline.events[i].t);
    EXPECT_EQ(a.timeline.events[i].value, b.timeline.events[i].value);
  }
  const HeuristicParams hp;
  EXPECT_EQ(setup.heuristics.fp_iteration_cap, hp.fp_iteration_cap);
  EXPECT_EQ(setup.heuristics.rins_fixing_tolerance, hp.rins_fixing_tolerance);
  EXPECT_EQ(setup.heuristics.rounding_gap_epsilon, hp.rounding_gap_epsilon);
  EXPECT_EQ(setup.heuristics.rh_delta_divisor, hp.rh_delta_divisor);
}

TEST(ParamSpaceTest, ValidationCatchesBadSpaces) {
  auto s = synthetic_space();
  s.partition = {{0, 1}, {2, 3}};
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = synthetic_space();
  s.partition = {{0, 1, 2}, {2, 3, 4}};
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = synthetic_space();
  s.params[1].default_value = 30;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = synthetic_space();
  s.params[4].name = "a";
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(ApplyConfig, RejectsUnknownNamesAndTypes) {
  EXPECT_THROW(apply_config({{"no_such_param", 1}}), std::invalid_argument);
  EXPECT_THROW(apply_config({{"sb_candidate_limit", "eight"}}), std::invalid_argument);
  EXPECT_THROW(apply_config({{"branching_rule", "psychic"}}), std::invalid_argument);
  const auto s = apply_config({{"branching_rule", "strong"}, {"primal_heuristics", "on"}});
  EXPECT_EQ(s.bnb.branching_rule, BranchingRule::kStrongBranching);
  EXPECT_TRUE(s.bnb.primal_heuristics_enabled);
}

TEST(EvaluateConfig, MeanOfPerInstanceGapIntegrals) {
  const auto gs = item_corpus(3, 12, 3, 60);
  EvalOptions o;
  o.budget = 2.0;
  const auto ev = evaluate_config(Config::object(), gs, o);
  ASSERT_EQ(ev.per_instance.size(), 3u);
  EXPECT_EQ(ev.failures, 0);
  double sum = 0.0;
  for (std::size_t i = 0; i < gs.size(); ++i) {
    BnbConfig cfg;
    cfg.time_limit = 2.0;
    SimulatedClock clock;
    const auto r = solve(gs[i].inst, cfg, Solution(gs[i].inst, gs[i].view.trivial_solution), &clock);
    EXPECT_EQ(ev.per_instance[i], gap_integral(r.timeline));
    sum += ev.per_instance[i];
  }
  EXPECT_DOUBLE_EQ(ev.mean, sum / 3.0);
  o.threads = 3;
  EXPECT_EQ(evaluate_config(Config::object(), gs, o).per_instance, ev.per_instance);
}

TEST(EvaluateConfig, SolvedInstantlyContributesNothing) {
  // The root LP is integral, so the optimum is known at time zero.
  Generated g;
  g.inst.add_var(0, 1, -1.0, true);
  g.inst.add_var(0, 1, -1.0, true);
  g.view.trivial_solution = {0.0, 0.0};
  EvalOptions o;
  o.budget = 5.0;
  // Only the root node's processing time separates the bounds.
  EXPECT_NEAR(evaluate_config(Config::object(), {&g, 1}, o).mean, 0.0, 1e-2);
}

TEST(EvaluateConfig, FailureScoresTheTrivialRectangle) {
  // Each trivial point violates its row, so the solver rejects the warm start.
  Generated g;
  g.inst.add_var(0, 1, 2.0, true);
  g.inst.add_var(0, 1, 3.0, true);
  SparseRow r;
  r.add(0, 1.0);
  r.add(1, 1.0);
  g.inst.add_row(r, RowSense::kGe, 1.0);
  g.view.trivial_solution = {0.0, 0.0};
  EvalOptions o;
  o.budget = 4.0;
  const auto ev = evaluate_config(Config::object(), {&g, 1}, o);
  EXPECT_EQ(ev.failures, 1);
  // pb0 = 0 lies below the LP bound 2, so the clamped rectangle is empty.
  EXPECT_DOUBLE_EQ(ev.mean, 0.0);

  // A trivial point above the LP bound scores T * (pb0 - db0).
  Generated h;
  h.inst.add_var(0, 1, -2.0, true);
  h.inst.add_var(0, 1, -3.0, true);
  SparseRow row;
  row.add(0, 1.0);
  row.add(1, 1.0);
  h.inst.add_row(row, RowSense::kLe, 1.0);
  h.view.trivial_solution = {1.0, 1.0};  // violates x0 + x1 <= 1
  const auto ev2 = evaluate_config(Config::object(), {&h, 1}, o);
  EXPECT_EQ(ev2.failures, 1);
  const double pb0 = -5.0, db0 = solve_lp(relax_all(h.inst)).objective;
  EXPECT_DOUBLE_EQ(db0, -3.0);
  EXPECT_DOUBLE_EQ(ev2.mean, 4.0 * std::max(0.0, pb0 - db0));
}

TEST(EvaluateConfig, RequiresTrivialSolutions) {
  Generated g;
  g.inst.add_var(0, 1, 1.0, true);
  EXPECT_THROW(evaluate_config(Config::object(), {&g, 1}, {}), std::invalid_argument);
}

TEST(Surrogate, LinearTargetIsFittedAtTrainingPoints) {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (int i = 0; i <= 20; ++i) {
    x.push_back({i / 20.0, 0.3});
    y.push_back(5.0 + 2.0 * i);
  }
  SurrogateModel m({32, 1, 0.7, 3});
  m.fit(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto [mean, var] = m.predict(x[i]);
    EXPECT_LE(std::abs(mean - y[i]), 0.1 * std::abs(y[i])) << i;
    EXPECT_GE(var, 0.0);
  }
  EXPECT_GT(m.importance()[0], 0.0);
  EXPECT_EQ(m.importance()[1], 0.0);
}

TEST(Surrogate, DuplicatesAndDeterminism) {
  const std::vector<std::vector<double>> x{{0.1}, {0.1}, {0.1}, {0.9}};
  const std::vector<double> y{1.0, 1.0, 1.0, 4.0};
  SurrogateModel a({32, 1, 0.7, 9}), b({32, 1, 0.7, 9});
  a.fit(x, y);
  b.fit(x, y);
  const std::vector<double> q{0.1};
  EXPECT_GE(a.predict(q).second, 0.0);
  EXPECT_EQ(a.predict(q), b.predict(q));
  EXPECT_THROW(a.fit({}, {}), std::invalid_argument);
  EXPECT_THROW(a.fit({{1.0}, {1.0, 2.0}}, {1.0, 2.0}), std::invalid_argument);
}

TEST(ExpectedImprovement, ClosedForms) {
  EXPECT_DOUBLE_EQ(expected_improvement(1.0, 0.0, 3.0, 0.5), 1.5);
  EXPECT_DOUBLE_EQ(expected_improvement(4.0, 0.0, 3.0, 0.0), 0.0);
  EXPECT_NEAR(expected_improvement(0.0, 1.0, 0.0, 0.0), 1.0 / std::sqrt(2.0 * M_PI), 1e-15);
  EXPECT_GT(expected_improvement(0.0, 4.0, 0.0, 0.0), expected_improvement(0.0, 1.0, 0.0, 0.0));
}

TEST(ReduceSpace, PlantedNoOpIsRankedLastAndFrozen) {
  int frozen = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ReduceOptions o;
    o.keep = 4;
    o.seed = seed;
    const auto r = reduce_space(synthetic_space(), synthetic_objective, o);
    ASSERT_FALSE(r.aborted);
    EXPECT_EQ(r.successes, 64);
    ASSERT_EQ(r.ranking.size(), 5u);
    const bool last = r.ranking.back().first == "noop";
    frozen += last && r.space.params[r.space.index_of("noop")].frozen;
  }
  EXPECT_GE(frozen, 9);
}

TEST(ReduceSpace, OutputIsASubspaceOfTheInput) {
  const auto in = synthetic_space();
  ReduceOptions o;
  o.keep = 2;
  const auto r = reduce_space(in, synthetic_objective, o);
  ASSERT_EQ(r.space.params.size(), in.params.size());
  EXPECT_EQ(r.space.partition, in.partition);
  int free = 0;
  for (std::size_t i = 0; i < in.params.size(); ++i) {
    EXPECT_EQ(r.space.params[i].default_value, in.params[i].default_value);
    free += !r.space.params[i].frozen;
  }
  EXPECT_EQ(free, 2);
  // Reducing again never unfreezes.
  o.keep = 4;
  const auto again = reduce_space(r.space, synthetic_objective, o);
  for (std::size_t i = 0; i < in.params.size(); ++i)
    if (r.space.params[i].frozen) EXPECT_TRUE(again.space.params[i].frozen);
}

TEST(ReduceSpace, KeepAllAllowlistAndAbort) {
  const auto in = synthetic_space();
  ReduceOptions o;
  o.keep = 5;
  int calls = 0;
  const auto unchanged = reduce_space(
      in, [&](const Config& c) { return ++calls, synthetic_objective(c); }, o);
  EXPECT_EQ(calls, 0);
  for (const auto& p : unchanged.space.params) EXPECT_FALSE(p.frozen);

  o.allowlist = {"a", "c"};
  const auto allowed = reduce_space(in, synthetic_objective, o);
  for (const auto& p : allowed.space.params) EXPECT_EQ(p.frozen, p.name != "a" && p.name != "c");
  o.allowlist = {"zzz"};
  EXPECT_THROW(reduce_space(in, synthetic_objective, o), std::invalid_argument);

  o.allowlist.clear();
  o.keep = 2;
  int seen = 0;
  std::mutex mu;
  const auto aborted = reduce_space(
      in,
      [&](const Config& c) {
        std::lock_guard<std::mutex> lock(mu);
        if (++seen % 5 != 0) throw std::runtime_error("probe failed");
        return synthetic_objective(c);
      },
      o);
  EXPECT_TRUE(aborted.aborted);
  EXPECT_LT(aborted.successes, 16);
  for (const auto& p : aborted.space.params) EXPECT_FALSE(p.frozen);
}

TEST(Tune, HistoryBookkeepingAndImprovement) {
  TuneOptions o;
  o.init_samples = 5;
  o.iterations = 3;
  o.batch = 2;
  o.acquisition_candidates = 256;
  const auto space = synthetic_space();
  const auto r = tune(space, synthetic_objective, o);
  EXPECT_EQ(r.history.size(), 2u * (5u + 3u * 2u));
  EXPECT_LE(r.best_objective, r.default_objective);
  EXPECT_LT(r.best_objective, r.default_objective);
  EXPECT_DOUBLE_EQ(r.best_objective, synthetic_objective(r.best));
  for (const auto& p : space.params) {
    ASSERT_TRUE(r.best.contains(p.name));
    EXPECT_TRUE(p.contains(r.best[p.name]));
  }
  for (const auto& t : r.history) {
    for (const auto& [k, v] : t.partial.items()) {
      const int i = space.index_of(k);
      ASSERT_GE(i, 0);
      EXPECT_TRUE(space.params[i].contains(v));
      EXPECT_TRUE(std::count(space.partition[t.subspace].begin(),
                             space.partition[t.subspace].end(), i));
    }
  }
  const auto text = history_to_jsonl(r);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), static_cast<long>(r.history.size()));
}

TEST(Tune, SingleMergedSubspace) {
  TuneOptions o;
  o.k = 1;
  o.init_samples = 3;
  o.iterations = 1;
  o.batch = 1;
  o.acquisition_candidates = 64;
  const auto r = tune(synthetic_space(), synthetic_objective, o);
  EXPECT_EQ(r.history.size(), 4u);
  EXPECT_EQ(r.subspaces.size(), 1u);
  o.k = 3;
  EXPECT_THROW(tune(synthetic_space(), synthetic_objective, o), std::invalid_argument);
  o.k = 0;
  o.iterations = 0;
  EXPECT_THROW(tune(synthetic_space(), synthetic_objective, o), std::invalid_argument);
}

TEST(Tune, DeterministicAndThreadCountInvariant) {
  TuneOptions o;
  o.init_samples = 4;
  o.iterations = 2;
  o.batch = 3;
  o.acquisition_candidates = 128;
  o.seed = 17;
  const auto a = tune(synthetic_space(), synthetic_objective, o);
  o.threads = 3;
  const auto b = tune(synthetic_space(), synthetic_objective, o);
  EXPECT_EQ(history_to_jsonl(a), history_to_jsonl(b));
  EXPECT_EQ(a.best, b.best);
}

// An evaluator that flatters each configuration on first sight and is
// pessimistic afterwards: the guard must keep the defaults.
TEST(Tune, IncumbentGuardRejectsRegressingMerge) {
  std::mutex mu;
  std::map<std::string, int> seen;
  const auto space = synthetic_space();
  const std::string defaults = space.defaults().dump();
  auto fickle = [&](const Config& c) {
    std::lock_guard<std::mutex> lock(mu);
    const int n = seen[c.dump()]++;
    if (c.dump() == defaults) return 10.0;
    return n == 0 ? 1.0 : 50.0;
  };
  TuneOptions o;
  o.init_samples = 2;
  o.iterations = 1;
  o.batch = 1;
  o.acquisition_candidates = 32;
  const auto r = tune(space, fickle, o);
  EXPECT_EQ(r.best, space.defaults());
  EXPECT_EQ(r.best_objective, 10.0);
  for (const auto& s : r.subspaces) EXPECT_FALSE(s.merged);
}

TEST(Tune, PlantedBinaryParameterIsSelected) {
  ParamSpace s;
  s.params = {ParamDef::categorical("switch", {"A", "B"}, "A")};
  s.partition = {{0}};
  auto f = [](const Config& c) { return c["switch"] == "B" ? 3.0 : 6.0; };
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TuneOptions o;
    o.k = 1;
    o.iterations = 1;
    o.batch = 1;
    o.seed = seed;
    const auto r = tune(s, f, o);
    EXPECT_EQ(r.best["switch"], "B") << seed;
    EXPECT_EQ(r.best_objective, 3.0);
  }
}

TEST(Cluster, SeparatesFamilies) {
  std::vector<MilpInstance> insts;
  std::vector<int> family;
  for (int s = 0; s < 4; ++s) {
    ItemPlacementParams ip;
    ip.items = 12;
    ip.containers = 3;
    ip.big_item_count = 1;
    ip.seed = s;
    insts.push_back(gen_item_placement(ip).inst);
    family.push_back(0);
    WorkloadParams wp;
    wp.tasks = 8;
    wp.machines = 4;
    wp.seed = s;
    insts.push_back(gen_workload(wp).inst);
    family.push_back(1);
    TimeIndexedParams tp;
    tp.seed = s;
    insts.push_back(gen_time_indexed(tp).inst);
    family.push_back(2);
  }
  const auto c = cluster_instances(insts, 3, 5);
  ASSERT_EQ(c.assignment.size(), insts.size());
  for (std::size_t i = 0; i < insts.size(); ++i)
    for (std::size_t j = 0; j < insts.size(); ++j)
      EXPECT_EQ(family[i] == family[j], c.assignment[i] == c.assignment[j]) << i << " " << j;
  EXPECT_EQ(cluster_instances(insts, 3, 5).assignment, c.assignment);
  const std::vector<MilpInstance> two(insts.begin(), insts.begin() + 2);
  EXPECT_EQ(cluster_instances(two, 3).centers.size(), 2u);
}

}  // namespace
}  // namespace deskmip
