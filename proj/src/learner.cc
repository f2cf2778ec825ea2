// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskmip/learner.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "deskmip/metrics.h"
#include "deskmip/parallel.h"

namespace deskmip {

std::size_t collect_sb_data(std::span<const MilpInstance> instances,
                            const std::optional<ScorerParams>& policy,
                            const CollectOptions& opts, int round, DaggerDataset& out) {
  const std::size_t before = out.size();
  for (const auto& inst : instances) {
    BnbConfig cfg;
    cfg.node_selection = opts.node_selection;
    cfg.branching_rule = policy ? BranchingRule::kLearned : BranchingRule::kStrongBranching;
    if (policy) cfg.scorer = *policy;
    cfg.sb_candidate_limit = opts.sb_limit;
    cfg.time_limit = opts.time_limit;
    long branched = 0;
    const LpSolver oracle_lp(inst);
    BnbHooks hooks;
    hooks.on_branch = [&](const NodeContext& ctx, std::span<const int> cands, int) {
      if (branched >= opts.node_cap) return;
      NodeState node;
      node.lower.assign(ctx.lower.begin(), ctx.lower.end());
      node.upper.assign(ctx.upper.begin(), ctx.upper.end());
      node.x.assign(ctx.x.begin(), ctx.x.end());
      node.objective = ctx.lp_objective;
      if (ctx.lp_basis) node.basis = *ctx.lp_basis;
      const auto sb = strong_branching(oracle_lp, node, cands, opts.sb_limit, LpOptions{});
      const FeatureMatrix all = extract_features(ctx, cands);
      Sample s;
      s.round = round;
      s.instance = inst.name;
      for (std::size_t k = 0; k < cands.size(); ++k) {
        if (sb.scores[k] < 0) continue;  // not probed
        s.candidates.push_back(cands[k]);
        s.features.push_back(all[k]);
        s.oracle_scores.push_back(sb.scores[k]);
      }
      if (s.candidates.empty()) return;
      s.oracle_argmax = argmax(s.oracle_scores);
      // Keep only nodes where the oracle strictly prefers one candidate; a
      // tied maximum carries no label.
      const double top = s.oracle_scores[s.oracle_argmax];
      if (std::count(s.oracle_scores.begin(), s.oracle_scores.end(), top) > 1) return;
      out.samples.push_back(std::move(s));
      ++branched;
    };
    // The node cap bounds the labeled nodes; the rollout itself is bounded
    // by the time limit and a generous node limit.
    cfg.node_limit = std::max<long>(1, 20 * opts.node_cap);
    SimulatedClock clock;
    solve(inst, cfg, std::nullopt, &clock, hooks);
  }
  return out.size() - before;
}

double scorer_loss(const DaggerDataset& data, const ScorerParams& p, double l2,
                   std::vector<double>* grad) {
  const int F = kNumFeatures;
  if (grad) grad->assign(F, 0.0);
  double loss = 0.0;
  const double S = static_cast<double>(std::max<std::size_t>(1, data.size()));
  std::vector<double> z, prob;
  for (const auto& s : data.samples) {
    const std::size_t C = s.features.size();
    z.assign(C, 0.0);
    for (std::size_t c = 0; c < C; ++c)
      for (int f = 0; f < F; ++f) z[c] += p.theta[f] * s.features[c][f];
    const double zmax = *std::max_element(z.begin(), z.end());
    double denom = 0.0;
    for (double v : z) denom += std::exp(v - zmax);
    const double lse = zmax + std::log(denom);
    loss += (lse - z[s.oracle_argmax]) / S;
    if (!grad) continue;
    for (std::size_t c = 0; c < C; ++c) {
      const double w = std::exp(z[c] - lse) - (static_cast<int>(c) == s.oracle_argmax ? 1.0 : 0.0);
      for (int f = 0; f < F; ++f) (*grad)[f] += w * s.features[c][f] / S;
    }
  }
  double sq = 0.0;
  for (int f = 0; f < F; ++f) {
    sq += p.theta[f] * p.theta[f];
    if (grad) (*grad)[f] += l2 * p.theta[f];
  }
  return loss + 0.5 * l2 * sq;
}

TrainResult train_scorer(const DaggerDataset& data, const TrainOptions& opts,
                         const std::optional<ScorerParams>& init) {
  if (data.size() == 0) throw std::invalid_argument("train_scorer: empty dataset");
  TrainResult res;
  res.params = init.value_or(ScorerParams{});
  if (static_cast<int>(res.params.theta.size()) != kNumFeatures)
    throw std::invalid_argument("train_scorer: initial parameters have the wrong dimension");
  res.degenerate = std::none_of(data.samples.begin(), data.samples.end(),
                                [](const Sample& s) { return s.features.size() >= 2; });
  if (res.degenerate) {
    res.loss = scorer_loss(data, res.params, 0.0);
    return res;
  }
  std::vector<double> g;
  double f = scorer_loss(data, res.params, opts.l2, &g);
  double step = 1.0;
  for (res.steps = 0; res.steps < opts.max_steps; ++res.steps) {
    double gn2 = 0.0;
    for (double v : g) gn2 += v * v;
    res.grad_norm = std::sqrt(gn2);
    if (res.grad_norm <= opts.grad_tol) break;
    ScorerParams trial = res.params;
    double ft = 0.0;
    for (int tries = 0; tries < 60; ++tries) {
      for (int k = 0; k < kNumFeatures; ++k) trial.theta[k] = res.params.theta[k] - step * g[k];
      ft = scorer_loss(data, trial, opts.l2);
      if (ft <= f - 0.5 * step * gn2) break;
      step *= 0.5;
    }
    if (!(ft < f)) break;  // no descent left at machine precision
    res.params = trial;
    f = scorer_loss(data, res.params, opts.l2, &g);
    step *= 2.0;
  }
  double gn2 = 0.0;
  for (double v : g) gn2 += v * v;
  res.grad_norm = std::sqrt(gn2);
  res.loss = f;
  return res;
}

DaggerResult dagger_loop(std::span<const MilpInstance> instances, const DaggerOptions& opts) {
  if (opts.rounds < 1) throw std::invalid_argument("dagger_loop: rounds must be >= 1");
  DaggerResult res;
  std::optional<ScorerParams> policy;
  for (int r = 0; r < opts.rounds; ++r) {
    collect_sb_data(instances, policy, opts.collect, r, res.dataset);
    res.dataset_sizes.push_back(res.dataset.size());
    if (res.dataset.size() == 0) throw std::runtime_error("dagger_loop: no branching node visited");
    // Round r inherits the weights of round r - 1.
    const auto trained = train_scorer(res.dataset, opts.train, policy);
    res.candidates.push_back(trained.params);
    policy = trained.params;
  }
  return res;
}

ScorerParams average_weights(std::span<const ScorerParams> candidates,
                             std::span<const int> subset) {
  if (subset.empty()) throw std::invalid_argument("average_weights: empty subset");
  const int n = static_cast<int>(candidates.size());
  for (int i : subset)
    if (i < 0 || i >= n) throw std::invalid_argument("average_weights: index out of range");
  const std::size_t dim = candidates[subset[0]].theta.size();
  for (int i : subset)
    if (candidates[i].theta.size() != dim)
      throw std::invalid_argument("average_weights: dimension mismatch");
  // Running mean: m += (x - m) / k is exact when every x equals m.
  ScorerParams avg = candidates[subset[0]];
  for (std::size_t k = 1; k < subset.size(); ++k) {
    const auto& c = candidates[subset[k]];
    const double w = static_cast<double>(k + 1);
    for (std::size_t f = 0; f < dim; ++f) avg.theta[f] += (c.theta[f] - avg.theta[f]) / w;
    avg.bias += (c.bias - avg.bias) / w;
  }
  return avg;
}

OmegaSearchResult greedy_omega_search(std::span<const ScorerParams> candidates,
                                      const ModelEvaluator& evaluate, int omega_max,
                                      int threads) {
  const int n = static_cast<int>(candidates.size());
  if (omega_max < 1 || omega_max > n)
    throw std::invalid_argument("greedy_omega_search: omega_max must lie in [1, #candidates]");
  OmegaSearchResult res;
  res.table.resize(omega_max);
  for (int w = 1; w <= omega_max; ++w) {
    std::vector<int> suffix(w);
    std::iota(suffix.begin(), suffix.end(), n - w);
    res.table[w - 1].omega = w;
    res.table[w - 1].params = average_weights(candidates, suffix);
  }
  parallel_for(omega_max, threads,
               [&](int i) { res.table[i].cr = evaluate(res.table[i].params); });
  std::size_t best = 0;
  for (std::size_t i = 1; i < res.table.size(); ++i)
    if (res.table[i].cr > res.table[best].cr) best = i;
  res.best = res.table[best].params;
  res.best_omega = res.table[best].omega;
  res.best_cr = res.table[best].cr;
  return res;
}

namespace {

double mean_cr(const BnbConfig& cfg, std::span<const MilpInstance> instances, int* failures) {
  double sum = 0.0;
  int ok = 0, bad = 0;
  for (const auto& inst : instances) {
    try {
      SimulatedClock clock;
      const auto r = solve(inst, cfg, std::nullopt, &clock);
      sum += cumulated_reward(r.timeline);
      ++ok;
    } catch (const std::exception&) {
      ++bad;
    }
  }
  if (failures) *failures = bad;
  return ok ? sum / ok : 0.0;
}

}  // namespace

double mean_cumulated_reward(const ScorerParams& p, std::span<const MilpInstance> instances,
                             const CrOptions& opts, int* failures) {
  BnbConfig cfg;
  cfg.branching_rule = BranchingRule::kLearned;
  cfg.scorer = p;
  cfg.time_limit = opts.time_limit;
  cfg.node_selection = opts.node_selection;
  return mean_cr(cfg, instances, failures);
}

double mean_cumulated_reward(BranchingRule rule, std::span<const MilpInstance> instances,
                             const CrOptions& opts, std::uint64_t seed) {
  BnbConfig cfg;
  cfg.branching_rule = rule;
  cfg.random_seed = seed;
  cfg.time_limit = opts.time_limit;
  cfg.node_selection = opts.node_selection;
  return mean_cr(cfg, instances, nullptr);
}

double topk_accuracy(const DaggerDataset& data, const SampleScorer& scorer, int k) {
  if (data.size() == 0) throw std::invalid_argument("topk_accuracy: empty dataset");
  int hits = 0;
  for (const auto& s : data.samples) {
    const auto sc = scorer(s);
    // Rank of the oracle choice: better scores, plus equal scores at lower index.
    int rank = 0;
    const double v = sc[s.oracle_argmax];
    for (int c = 0; c < static_cast<int>(sc.size()); ++c)
      if (sc[c] > v || (sc[c] == v && c < s.oracle_argmax)) ++rank;
    if (rank < k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

double topk_accuracy(const DaggerDataset& data, const ScorerParams& p, int k) {
  return topk_accuracy(data, [&](const Sample& s) { return score_all(p, s.features); }, k);
}

double uniform_top1_baseline(const DaggerDataset& data) {
  if (data.size() == 0) throw std::invalid_argument("uniform_top1_baseline: empty dataset");
  double sum = 0.0;
  for (const auto& s : data.samples) sum += 1.0 / static_cast<double>(s.candidates.size());
  return sum / static_cast<double>(data.size());
}

EvalReport evaluate_model(const ScorerParams& p, const DaggerDataset& labeled,
                          std::span<const MilpInstance> validation, const CrOptions& opts,
                          std::span<const MilpInstance> test) {
  EvalReport rep;
  rep.top1_sba = topk_accuracy(labeled, p, 1);
  rep.top3_sba = topk_accuracy(labeled, p, 3);
  rep.cr_validation = mean_cumulated_reward(p, validation, opts);
  if (!test.empty()) rep.cr_test = mean_cumulated_reward(p, test, opts);
  return rep;
}

nlohmann::json model_to_json(const ScorerParams& p, const nlohmann::json& meta) {
  return {{"schema_version", kFeatureSchemaVersion},
          {"num_features", kNumFeatures},
          {"theta", p.theta},
          {"bias", p.bias},
          {"meta", meta.is_null() ? nlohmann::json::object() : meta}};
}

ScorerParams model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema_version").get<int>() != kFeatureSchemaVersion)
      throw std::runtime_error("model feature schema version mismatch");
    ScorerParams p;
    p.theta = j.at("theta").get<std::vector<double>>();
    p.bias = j.at("bias").get<double>();
    if (static_cast<int>(p.theta.size()) != kNumFeatures)
      throw std::runtime_error("model has " + std::to_string(p.theta.size()) + " weights");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed model document: ") + e.what());
  }
}

std::string dataset_to_jsonl(const DaggerDataset& d) {
  std::string out;
  for (const auto& s : d.samples) {
    nlohmann::json j = {{"round", s.round},
                        {"instance", s.instance},
                        {"candidates", s.candidates},
                        {"features", s.features},
                        {"oracle_scores", s.oracle_scores},
                        {"oracle_argmax", s.oracle_argmax}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

DaggerDataset dataset_from_jsonl(const std::string& text) {
  DaggerDataset d;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Sample s;
      s.round = j.at("round").get<int>();
      s.instance = j.at("instance").get<std::string>();
      s.candidates = j.at("candidates").get<std::vector<int>>();
      s.features = j.at("features").get<FeatureMatrix>();
      s.oracle_scores = j.at("oracle_scores").get<std::vector<double>>();
      s.oracle_argmax = j.at("oracle_argmax").get<int>();
      if (s.features.size() != s.candidates.size() ||
          s.oracle_scores.size() != s.candidates.size() || s.oracle_argmax < 0 ||
          s.oracle_argmax >= static_cast<int>(s.candidates.size()))
        throw std::runtime_error("inconsistent sample");
      d.samples.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw std::runtime_error("dataset line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return d;
}

}  // namespace deskmip
