// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

// Surrogate-driven configuration of the tree search. The search space is
// split into sub-spaces that are optimized one after another; inside each,
// a tree-ensemble surrogate proposes batches by expected improvement. A
// sub-space optimum replaces the incumbent full configuration only when it
// does not regress the incumbent objective.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "deskmip/bnb.h"
#include "deskmip/generators.h"
#include "deskmip/heuristics.h"
#include "json.hpp"

namespace deskmip {

// A configuration is a flat JSON object: parameter name -> string
// (categorical), integer or number. Absent parameters keep their defaults.
using Config = nlohmann::json;

enum class ParamKind { kCategorical, kInt, kFloat };

struct ParamDef {
  std::string name;
  ParamKind kind = ParamKind::kFloat;
  std::vector<std::string> values;  // categorical choices
  double lo = 0.0;                  // inclusive numeric bounds
  double hi = 0.0;
  bool log = false;  // sampled and modeled in the log domain
  nlohmann::json default_value;
  bool frozen = false;  // held at the default by tune()

  static ParamDef categorical(std::string name, std::vector<std::string> values,
                              std::string def);
  static ParamDef integer(std::string name, long lo, long hi, long def, bool log = false);
  static ParamDef real(std::string name, double lo, double hi, double def, bool log = false);

  bool contains(const nlohmann::json& v) const;
};

struct ParamSpace {
  std::vector<ParamDef> params;
  std::vector<std::vector<int>> partition;  // indices into params
  std::vector<std::string> subspace_names;

  // Throws std::invalid_argument: duplicate names, defaults out of bounds,
  // or a partition that is not an exact cover.
  void validate() const;
  Config defaults() const;
  int index_of(const std::string& name) const;  // -1 when absent
  // Params of sub-space i that tune() may change.
  std::vector<int> free_params(int subspace) const;
};

// Fifteen solver parameters in four sub-spaces: branching, node selection,
// primal heuristics and LP.
ParamSpace default_space();

struct SolverSetup {
  BnbConfig bnb;
  HeuristicParams heuristics;
  double submip_seconds = 1.0;
};

// Throws std::invalid_argument on an unknown name or a value of the wrong type.
SolverSetup apply_config(const Config& config);

struct EvalOptions {
  double budget = 30.0;  // simulated seconds per instance
  int threads = 1;
};

struct ConfigEvaluation {
  double mean = 0.0;
  std::vector<double> per_instance;
  std::vector<std::uint8_t> failed;  // solver error; scored at the trivial gap
  int failures = 0;
};

// Mean primal-dual gap integral of the configured tree search, started from
// the trivial solution and the root LP bound. Throws std::invalid_argument
// for an instance without a trivial solution.
ConfigEvaluation evaluate_config(const Config& config, std::span<const Generated> instances,
                                 const EvalOptions& opts);

// Objective of a configuration; smaller is better. Called concurrently.
using ConfigEvaluator = std::function<double(const Config&)>;

// Ensemble of extremely randomized regression trees grown on the full data:
// each node tries one uniform random cut on each of a random subset of the
// features and keeps the best. Distinct training points end in pure leaves,
// so a noiseless objective is reproduced there; the variance is the spread of
// the per-tree predictions and grows away from the data.
class SurrogateModel {
 public:
  struct Options {
    int trees = 32;
    int min_leaf = 1;
    double feature_fraction = 0.7;
    std::uint64_t seed = 0;
  };

  SurrogateModel() = default;
  explicit SurrogateModel(Options o) : opts_(o) {}

  // Throws std::invalid_argument on empty or ragged data.
  void fit(const std::vector<std::vector<double>>& x, const std::vector<double>& y);
  std::pair<double, double> predict(std::span<const double> x) const;
  // Total variance reduction credited to each input column.
  const std::vector<double>& importance() const { return importance_; }

 private:
  struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0;
    int left = -1;
    int right = -1;
  };
  using Tree = std::vector<TreeNode>;

  Options opts_;
  std::vector<Tree> trees_;
  std::vector<double> importance_;
  int dims_ = 0;
};

// Encodes the given parameters of a configuration into [0, 1] columns:
// one-hot categoricals, numbers scaled to their (log) range.
std::vector<double> encode(const ParamSpace& space, std::span<const int> params,
                           const Config& config);
// Column owner per encoded column.
std::vector<int> encoding_owners(const ParamSpace& space, std::span<const int> params);

// Expected improvement below `best` for minimization, with margin xi.
double expected_improvement(double mean, double variance, double best, double xi);

struct ReduceOptions {
  std::vector<std::string> allowlist;  // empty: every parameter allowed
  int probes = 64;
  int keep = 12;
  int min_successes = 16;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct ReduceResult {
  ParamSpace space;
  std::vector<std::pair<std::string, double>> ranking;  // most important first
  int successes = 0;
  bool aborted = false;  // too few successful probes; space unchanged
};

// Freezes parameters outside the allowlist, then all but the `keep` most
// important ones by tree-ensemble variance reduction over random probes.
// The output only ever freezes more parameters than the input.
ReduceResult reduce_space(const ParamSpace& space, const ConfigEvaluator& evaluate,
                          const ReduceOptions& opts);

struct TuneOptions {
  int k = 0;  // 0: the space's own partition; 1: one merged sub-space
  int init_samples = 4;
  int iterations = 2;  // N
  int batch = 1;       // q
  double xi = 0.01;    // on standardized objectives
  int acquisition_candidates = 1024;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct TrialRecord {
  int subspace = 0;
  int iteration = 0;  // 0 for the initial samples
  Config partial;
  double objective = 0.0;
  int incumbent_version = 0;  // x* snapshot the trial was completed with
};

struct SubspaceOutcome {
  std::string name;
  Config best_partial;
  double best_objective = 0.0;
  bool merged = false;
};

struct TunerResult {
  Config best;  // complete
  double best_objective = 0.0;
  double default_objective = 0.0;
  std::vector<TrialRecord> history;
  std::vector<SubspaceOutcome> subspaces;
  int incumbent_version = 0;
};

// Throws std::invalid_argument when iterations or batch is below 1, or k
// matches neither 1 nor the space's partition.
TunerResult tune(const ParamSpace& space, const ConfigEvaluator& evaluate,
                 const TuneOptions& opts);

std::string history_to_jsonl(const TunerResult& r);

// Summary features for clustering: variables, rows, density, integer
// fraction and recovered period count.
std::vector<double> instance_summary(const MilpInstance& inst);

struct Clustering {
  std::vector<int> assignment;
  std::vector<std::vector<double>> centers;  // in standardized feature space
};

// k-means on standardized summaries with k-means++ seeding; k is capped at
// the number of instances.
Clustering cluster_instances(std::span<const MilpInstance> instances, int k = 3,
                             std::uint64_t seed = 0);

}  // namespace deskmip
