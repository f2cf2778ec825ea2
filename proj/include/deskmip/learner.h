// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

// Imitation of strong branching with a linear softmax scorer: oracle-labeled
// data collection under the current policy, aggregation over rounds with
// warm-started retraining, weight averaging of the round models and selection
// by validation cumulated reward.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deskmip/bnb.h"
#include "deskmip/features.h"
#include "json.hpp"

namespace deskmip {

// One branching node. Candidates are the oracle's probed subset, ascending by
// variable index; features were computed against the node's full candidate
// list, exactly as the learned rule sees them.
struct Sample {
  std::vector<int> candidates;
  FeatureMatrix features;
  std::vector<double> oracle_scores;
  int oracle_argmax = 0;  // argmax(oracle_scores), ties to the lower index
  int round = 0;
  std::string instance;
};

struct DaggerDataset {
  std::vector<Sample> samples;
  std::size_t size() const { return samples.size(); }
};

struct CollectOptions {
  long node_cap = 50;        // branching nodes per instance
  double time_limit = 10.0;  // simulated seconds per instance
  int sb_limit = 8;          // oracle probes per node
  NodeSelection node_selection = NodeSelection::kBestBound;
};

// Rolls out `policy` (strong branching when empty) and labels every branching
// node with strong-branching scores. Appends to `out`; returns the number of
// samples added.
std::size_t collect_sb_data(std::span<const MilpInstance> instances,
                            const std::optional<ScorerParams>& policy,
                            const CollectOptions& opts, int round, DaggerDataset& out);

struct TrainOptions {
  double l2 = 1e-3;
  int max_steps = 2000;
  double grad_tol = 1e-5;
};

struct TrainResult {
  ScorerParams params;
  int steps = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  bool degenerate = false;  // no sample with two or more candidates
};

// Mean softmax cross-entropy over samples plus l2/2 |theta|^2. The bias
// cancels in the softmax, so its gradient is zero.
double scorer_loss(const DaggerDataset& data, const ScorerParams& p, double l2,
                   std::vector<double>* grad = nullptr);

// Full-batch gradient descent with Armijo backtracking.
TrainResult train_scorer(const DaggerDataset& data, const TrainOptions& opts,
                         const std::optional<ScorerParams>& init = std::nullopt);

struct DaggerOptions {
  int rounds = 3;
  CollectOptions collect;
  TrainOptions train;
};

struct DaggerResult {
  std::vector<ScorerParams> candidates;  // one per round, oldest first
  DaggerDataset dataset;
  std::vector<std::size_t> dataset_sizes;  // after each round
};

DaggerResult dagger_loop(std::span<const MilpInstance> instances, const DaggerOptions& opts);

// Arithmetic mean of candidates[subset]. Throws std::invalid_argument on an
// empty subset, an index out of range or a dimension mismatch.
ScorerParams average_weights(std::span<const ScorerParams> candidates,
                             std::span<const int> subset);

using ModelEvaluator = std::function<double(const ScorerParams&)>;

struct OmegaEntry {
  int omega = 0;
  ScorerParams params;
  double cr = 0.0;
};

struct OmegaSearchResult {
  ScorerParams best;
  int best_omega = 0;
  double best_cr = 0.0;
  std::vector<OmegaEntry> table;
};

// Averages the latest omega models for omega = 1..omega_max and keeps the
// largest evaluation, ties to the smaller omega.
OmegaSearchResult greedy_omega_search(std::span<const ScorerParams> candidates,
                                      const ModelEvaluator& evaluate, int omega_max,
                                      int threads = 1);

struct CrOptions {
  double time_limit = 10.0;  // simulated seconds per instance
  NodeSelection node_selection = NodeSelection::kBestBound;
};

// Mean cumulated reward of the learned rule. Instances whose solve throws are
// skipped; `failures` counts them.
double mean_cumulated_reward(const ScorerParams& p, std::span<const MilpInstance> instances,
                             const CrOptions& opts, int* failures = nullptr);

// Mean cumulated reward of a fixed rule (strong branching, random, ...).
double mean_cumulated_reward(BranchingRule rule, std::span<const MilpInstance> instances,
                             const CrOptions& opts, std::uint64_t seed = 0);

using SampleScorer = std::function<std::vector<double>(const Sample&)>;

// Fraction of samples whose oracle argmax is among the k best scores, ranking
// ties by lower index.
double topk_accuracy(const DaggerDataset& data, const SampleScorer& scorer, int k);
double topk_accuracy(const DaggerDataset& data, const ScorerParams& p, int k);

// mean(1 / |candidates|), the expected top-1 accuracy of a uniform guess.
double uniform_top1_baseline(const DaggerDataset& data);

struct EvalReport {
  double top1_sba = 0.0;
  double top3_sba = 0.0;
  double cr_validation = 0.0;
  std::optional<double> cr_test;
};

EvalReport evaluate_model(const ScorerParams& p, const DaggerDataset& labeled,
                          std::span<const MilpInstance> validation, const CrOptions& opts,
                          std::span<const MilpInstance> test = {});

// Model document: schema version, theta, bias and free-form metadata.
nlohmann::json model_to_json(const ScorerParams& p, const nlohmann::json& meta = {});
ScorerParams model_from_json(const nlohmann::json& j);  // throws std::runtime_error

// One JSON document per line.
std::string dataset_to_jsonl(const DaggerDataset& d);
DaggerDataset dataset_from_jsonl(const std::string& text);

}  // namespace deskmip
