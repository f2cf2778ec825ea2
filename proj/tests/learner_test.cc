// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskmip/learner.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "deskmip/generators.h"
#include "deskmip/metrics.h"
#include "deskmip/rng.h"
#include "test_util.h"

namespace deskmip {
namespace {

std::vector<MilpInstance> small_item_corpus(int count, std::uint64_t seed0) {
  std::vector<MilpInstance> out;
  for (int s = 0; s < count; ++s) {
    ItemPlacementParams p;
    p.items = 12;
    p.containers = 3;
    p.big_item_count = 1;
    p.seed = seed0 + s;
    out.push_back(gen_item_placement(p).inst);
  }
  return out;
}

// Random samples with 2..6 candidates and features in [-1, 1].
DaggerDataset random_dataset(std::uint64_t seed, int n) {
  Rng rng(seed);
  DaggerDataset d;
  for (int i = 0; i < n; ++i) {
    Sample s;
    const int c = static_cast<int>(rng.uniform_int(2, 6));
    for (int k = 0; k < c; ++k) {
      FeatureRow f;
      for (auto& v : f) v = rng.uniform(-1.0, 1.0);
      s.candidates.push_back(k);
      s.features.push_back(f);
      s.oracle_scores.push_back(rng.uniform());
    }
    s.oracle_argmax = argmax(s.oracle_scores);
    d.samples.push_back(std::move(s));
  }
  return d;
}

TEST(Features, HandComputedRow) {
  MilpInstance inst;
  inst.add_var(0, 1, 2.0, true);
  inst.add_var(0, 4, -4.0, true);
  SparseRow r1, r2;
  r1.add(0, 1.0);
  r1.add(1, 2.0);
  r2.add(1, -0.5);
  inst.add_row(r1, RowSense::kLe, 5.0);
  inst.add_row(r2, RowSense::kLe, 0.0);
  const auto scales = InstanceScales::of(inst);
  const std::vector<double> lo{0, 0}, hi{1, 4}, x{0.5, 1.25};
  const std::vector<double> inc{1, 1};
  NodeContext ctx;
  ctx.inst = &inst;
  ctx.scales = &scales;
  ctx.lower = lo;
  ctx.upper = hi;
  ctx.x = x;
  ctx.depth = 1;
  ctx.incumbent = &inc;
  const std::vector<int> cands{0, 1};
  const auto f = extract_features(ctx, cands);
  ASSERT_EQ(f.size(), 2u);
  EXPECT_DOUBLE_EQ(f[0][kFractionality], 1.0);
  EXPECT_DOUBLE_EQ(f[1][kFractionality], 0.5);
  EXPECT_DOUBLE_EQ(f[0][kObjectiveCoef], 0.5);
  EXPECT_DOUBLE_EQ(f[1][kObjectiveCoef], -1.0);
  EXPECT_DOUBLE_EQ(f[1][kLpValue], 1.25 / 4.0);
  EXPECT_DOUBLE_EQ(f[1][kDistToLower], 1.25 / 4.0);
  EXPECT_DOUBLE_EQ(f[1][kDistToUpper], 2.75 / 4.0);
  EXPECT_DOUBLE_EQ(f[0][kColumnCount], 0.5);
  EXPECT_DOUBLE_EQ(f[1][kColumnCount], 1.0);
  EXPECT_DOUBLE_EQ(f[0][kColumnMaxAbs], 0.5);
  EXPECT_DOUBLE_EQ(f[1][kColumnMeanAbs], 1.25 / 2.0);
  EXPECT_DOUBLE_EQ(f[0][kDepth], 0.5);
  // round(0.5) = 1 agrees with the incumbent; round(1.25) = 1 agrees too.
  EXPECT_DOUBLE_EQ(f[0][kIncumbentAgreement], 1.0);
  ctx.incumbent = nullptr;
  EXPECT_DOUBLE_EQ(extract_features(ctx, cands)[0][kIncumbentAgreement], 0.0);
}

TEST(Features, RejectEmptyCandidates) {
  MilpInstance inst;
  inst.add_var(0, 1, 1.0, true);
  const auto scales = InstanceScales::of(inst);
  NodeContext ctx;
  ctx.inst = &inst;
  ctx.scales = &scales;
  EXPECT_THROW(extract_features(ctx, {}), std::invalid_argument);
}

TEST(Collect, SamplesAreWellFormedAndCapped) {
  const auto corpus = small_item_corpus(3, 100);
  CollectOptions opts;
  opts.node_cap = 10;
  DaggerDataset d;
  const auto added = collect_sb_data(corpus, std::nullopt, opts, 4, d);
  EXPECT_EQ(added, d.size());
  EXPECT_GT(d.size(), 0u);
  EXPECT_LE(d.size(), static_cast<std::size_t>(opts.node_cap * corpus.size()));
  for (const auto& s : d.samples) {
    EXPECT_EQ(s.round, 4);
    EXPECT_LE(s.candidates.size(), static_cast<std::size_t>(opts.sb_limit));
    EXPECT_TRUE(std::is_sorted(s.candidates.begin(), s.candidates.end()));
    EXPECT_EQ(s.features.size(), s.candidates.size());
    const double top = s.oracle_scores[s.oracle_argmax];
    EXPECT_EQ(std::count(s.oracle_scores.begin(), s.oracle_scores.end(), top), 1);
    for (const auto& row : s.features)
      for (double v : row) EXPECT_TRUE(v >= -1.0 && v <= 1.0);
  }
}

// Under the strong-branching policy the tree search branches on the oracle's
// argmax whenever that argmax is clear.
TEST(Collect, StrongBranchingRolloutFollowsTheOracle) {
  const auto corpus = small_item_corpus(2, 300);
  int checked = 0;
  for (const auto& inst : corpus) {
    const LpSolver cold(inst);
    BnbConfig cfg;
    cfg.branching_rule = BranchingRule::kStrongBranching;
    cfg.time_limit = 2.0;
    BnbHooks hooks;
    hooks.on_branch = [&](const NodeContext& ctx, std::span<const int> cands, int chosen) {
      NodeState st;
      st.lower.assign(ctx.lower.begin(), ctx.lower.end());
      st.upper.assign(ctx.upper.begin(), ctx.upper.end());
      st.x.assign(ctx.x.begin(), ctx.x.end());
      st.objective = ctx.lp_objective;
      auto sc = strong_branching(cold, st, cands, cfg.sb_candidate_limit, {}).scores;
      const int best = argmax(sc);
      double second = -1.0;
      for (int k = 0; k < static_cast<int>(sc.size()); ++k)
        if (k != best) second = std::max(second, sc[k]);
      if (sc[best] - second <= 1e-6 * std::max(1.0, std::abs(sc[best]))) return;
      EXPECT_EQ(cands[best], chosen);
      ++checked;
    };
    SimulatedClock clock;
    solve(inst, cfg, std::nullopt, &clock, hooks);
  }
  EXPECT_GT(checked, 10);
}

TEST(Dagger, RoundsGrowTheDatasetAndYieldOneModelEach) {
  const auto corpus = small_item_corpus(2, 500);
  DaggerOptions opts;
  opts.rounds = 3;
  opts.collect.node_cap = 8;
  const auto r = dagger_loop(corpus, opts);
  ASSERT_EQ(r.candidates.size(), 3u);
  ASSERT_EQ(r.dataset_sizes.size(), 3u);
  EXPECT_LT(r.dataset_sizes[0], r.dataset_sizes[1]);
  EXPECT_LT(r.dataset_sizes[1], r.dataset_sizes[2]);
  EXPECT_EQ(r.dataset.size(), r.dataset_sizes.back());
  EXPECT_LE(r.dataset.size(), 3u * 8u * corpus.size());
  for (std::size_t i = 0; i < r.dataset.size(); ++i) {
    const int round = r.dataset.samples[i].round;
    const auto start = round == 0 ? 0 : r.dataset_sizes[round - 1];
    EXPECT_TRUE(i >= start && i < r.dataset_sizes[round]);
  }
  EXPECT_THROW(dagger_loop(corpus, DaggerOptions{0, {}, {}}), std::invalid_argument);
}

TEST(Train, SeparableToyIsLearnedPerfectly) {
  DaggerDataset d = random_dataset(7, 200);
  // Make feature 3 alone decide the label.
  for (auto& s : d.samples)
    for (int c = 0; c < static_cast<int>(s.features.size()); ++c)
      s.features[c][3] = c == s.oracle_argmax ? 1.0 : -1.0;
  const auto r = train_scorer(d, {});
  EXPECT_DOUBLE_EQ(topk_accuracy(d, r.params, 1), 1.0);
  EXPECT_GT(r.params.theta[3], 0.0);
}

TEST(Train, HeavyRegularizationShrinksWeightsToZero) {
  const auto d = random_dataset(8, 100);
  TrainOptions o;
  o.l2 = 1e6;
  const auto r = train_scorer(d, o);
  double norm = 0.0;
  for (double v : r.params.theta) norm += v * v;
  EXPECT_LT(std::sqrt(norm), 1e-5);
}

TEST(Train, LossDecreasesAndStationaryPointIsReached) {
  const auto d = random_dataset(9, 150);
  const double before = scorer_loss(d, ScorerParams{}, 1e-3);
  const auto r = train_scorer(d, {});
  EXPECT_LT(r.loss, before);
  EXPECT_LE(r.grad_norm, 1e-5);
  EXPECT_FALSE(r.degenerate);
}

TEST(Train, SingleCandidateDataIsDegenerate) {
  DaggerDataset d;
  Sample s;
  s.candidates = {0};
  s.features = {FeatureRow{}};
  s.oracle_scores = {1.0};
  d.samples = {s, s};
  const auto r = train_scorer(d, {});
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.params, ScorerParams{});
  EXPECT_THROW(train_scorer(DaggerDataset{}, {}), std::invalid_argument);
}

TEST(Train, GradientMatchesCentralDifferences) {
  const auto d = random_dataset(10, 60);
  Rng rng(11);
  for (int point = 0; point < 20; ++point) {
    ScorerParams p;
    for (auto& v : p.theta) v = rng.uniform(-2.0, 2.0);
    std::vector<double> g;
    scorer_loss(d, p, 1e-2, &g);
    for (int k = 0; k < kNumFeatures; ++k) {
      const double h = 1e-5;
      ScorerParams a = p, b = p;
      a.theta[k] += h;
      b.theta[k] -= h;
      const double fd = (scorer_loss(d, a, 1e-2) - scorer_loss(d, b, 1e-2)) / (2 * h);
      EXPECT_LE(std::abs(fd - g[k]), 1e-5 * std::max(1.0, std::abs(g[k])))
          << "point " << point << " k " << k;
    }
  }
}

TEST(AverageWeights, SingleModelIsIdentity) {
  ScorerParams a;
  for (int k = 0; k < kNumFeatures; ++k) a.theta[k] = 0.1 * k - 0.37;
  a.bias = 0.3;
  const std::vector<ScorerParams> c{ScorerParams{}, a};
  const std::vector<int> one{1};
  EXPECT_EQ(average_weights(c, one), a);
}

TEST(AverageWeights, DuplicatesAreIdempotent) {
  ScorerParams a;
  for (int k = 0; k < kNumFeatures; ++k) a.theta[k] = 1.0 / (k + 3.0);
  const std::vector<ScorerParams> c{a, a, a};
  const std::vector<int> all{0, 1, 2};
  EXPECT_EQ(average_weights(c, all), a);
}

TEST(AverageWeights, ArithmeticMeanAndErrors) {
  ScorerParams a, b;
  a.theta.assign(kNumFeatures, 1.0);
  b.theta.assign(kNumFeatures, 3.0);
  const std::vector<ScorerParams> c{a, b};
  const std::vector<int> both{0, 1};
  EXPECT_EQ(average_weights(c, both).theta, std::vector<double>(kNumFeatures, 2.0));
  EXPECT_THROW(average_weights(c, std::vector<int>{}), std::invalid_argument);
  EXPECT_THROW(average_weights(c, std::vector<int>{2}), std::invalid_argument);
  ScorerParams short_one;
  short_one.theta.resize(3);
  const std::vector<ScorerParams> mixed{a, short_one};
  EXPECT_THROW(average_weights(mixed, both), std::invalid_argument);
}

// The evaluator stub reads the suffix length from the averaged bias.
TEST(OmegaSearch, ReturnsArgmaxOfItsOwnTable) {
  std::vector<ScorerParams> c(3);
  c[0].bias = 300.0;
  c[1].bias = 200.0;
  c[2].bias = 100.0;
  // Suffix averages: Ω=1 -> 100, Ω=2 -> 150, Ω=3 -> 200.
  auto stub = [](const ScorerParams& p) {
    if (p.bias == 100.0) return 5.0;
    if (p.bias == 150.0) return 9.0;
    return 7.0;
  };
  for (int threads : {1, 3}) {
    const auto r = greedy_omega_search(c, stub, 3, threads);
    ASSERT_EQ(r.table.size(), 3u);
    EXPECT_EQ(r.table[0].cr, 5.0);
    EXPECT_EQ(r.table[1].cr, 9.0);
    EXPECT_EQ(r.table[2].cr, 7.0);
    EXPECT_EQ(r.best_omega, 2);
    EXPECT_EQ(r.best_cr, 9.0);
    EXPECT_EQ(r.best, r.table[1].params);
  }
  const auto tie = greedy_omega_search(c, [](const ScorerParams&) { return 1.0; }, 3);
  EXPECT_EQ(tie.best_omega, 1);
  EXPECT_THROW(greedy_omega_search(c, stub, 4), std::invalid_argument);
  EXPECT_THROW(greedy_omega_search(c, stub, 0), std::invalid_argument);
}

TEST(TopK, OracleScoresAreExactAndLargeKIsOne) {
  const auto d = random_dataset(12, 80);
  auto oracle = [](const Sample& s) { return s.oracle_scores; };
  EXPECT_DOUBLE_EQ(topk_accuracy(d, oracle, 1), 1.0);
  EXPECT_DOUBLE_EQ(topk_accuracy(d, ScorerParams{}, 6), 1.0);
  // All-equal scores rank the lowest index first.
  double first = 0.0;
  for (const auto& s : d.samples) first += s.oracle_argmax == 0;
  EXPECT_DOUBLE_EQ(topk_accuracy(d, ScorerParams{}, 1), first / d.size());
}

TEST(TopK, RandomScorerMatchesUniformBaseline) {
  const auto d = random_dataset(13, 4000);
  Rng rng(14);
  auto noise = [&](const Sample& s) {
    std::vector<double> v(s.candidates.size());
    for (auto& x : v) x = rng.uniform();
    return v;
  };
  const double acc = topk_accuracy(d, noise, 1);
  const double base = uniform_top1_baseline(d);
  double var = 0.0;
  for (const auto& s : d.samples) {
    const double p = 1.0 / s.candidates.size();
    var += p * (1 - p);
  }
  const double sigma = std::sqrt(var) / d.size();
  EXPECT_LE(std::abs(acc - base), 3 * sigma);
}

TEST(TopK, PositiveScalingKeepsRanking) {
  const auto d = random_dataset(15, 200);
  ScorerParams p;
  Rng rng(16);
  for (auto& v : p.theta) v = rng.uniform(-1.0, 1.0);
  ScorerParams q = p;
  for (auto& v : q.theta) v *= 3.7;
  for (int k = 1; k <= 3; ++k) EXPECT_EQ(topk_accuracy(d, p, k), topk_accuracy(d, q, k));
}

TEST(CumulatedReward, StrongBranchingAtLeastRandomOnSmallCorpus) {
  const auto corpus = small_item_corpus(6, 5000);
  CrOptions o;
  o.time_limit = 10.0;
  const double sb = mean_cumulated_reward(BranchingRule::kStrongBranching, corpus, o);
  const double rnd = mean_cumulated_reward(BranchingRule::kRandom, corpus, o);
  EXPECT_GE(sb, rnd);
  int failures = -1;
  const double learned = mean_cumulated_reward(ScorerParams{}, corpus, o, &failures);
  EXPECT_EQ(failures, 0);
  EXPECT_TRUE(std::isfinite(learned));
}

TEST(Serialization, ModelRoundTripsExactly) {
  ScorerParams p;
  for (int k = 0; k < kNumFeatures; ++k) p.theta[k] = std::sqrt(k + 0.1) / 7.0;
  p.bias = -1.0 / 3.0;
  const auto j = model_to_json(p, {{"omega", 2}});
  EXPECT_EQ(model_from_json(nlohmann::json::parse(j.dump())), p);
  auto bad = j;
  bad["schema_version"] = 99;
  EXPECT_THROW(model_from_json(bad), std::runtime_error);
  bad = j;
  bad["theta"] = {1.0, 2.0};
  EXPECT_THROW(model_from_json(bad), std::runtime_error);
  EXPECT_THROW(model_from_json(nlohmann::json::object()), std::runtime_error);
}

TEST(Serialization, DatasetRoundTripsExactly) {
  auto d = random_dataset(17, 30);
  d.samples[3].instance = "inst-3";
  d.samples[4].round = 2;
  const auto text = dataset_to_jsonl(d);
  const auto back = dataset_from_jsonl(text);
  ASSERT_EQ(back.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(back.samples[i].candidates, d.samples[i].candidates);
    EXPECT_EQ(back.samples[i].features, d.samples[i].features);
    EXPECT_EQ(back.samples[i].oracle_scores, d.samples[i].oracle_scores);
    EXPECT_EQ(back.samples[i].oracle_argmax, d.samples[i].oracle_argmax);
    EXPECT_EQ(back.samples[i].round, d.samples[i].round);
    EXPECT_EQ(back.samples[i].instance, d.samples[i].instance);
  }
  EXPECT_EQ(dataset_to_jsonl(back), text);
  EXPECT_THROW(dataset_from_jsonl("{\"round\": 0}\n"), std::runtime_error);
}

}  // namespace
}  // namespace deskmip
