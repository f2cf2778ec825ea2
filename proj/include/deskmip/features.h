// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

// Per-candidate branching features and the linear scorer over them.

#pragma once

#include <array>
#include <span>
#include <vector>

#include "deskmip/model.h"

namespace deskmip {

struct LpBasis;

inline constexpr int kNumFeatures = 12;
inline constexpr int kFeatureSchemaVersion = 1;

// Feature columns, in order.
enum Feature : int {
  kFractionality = 0,  // 2 * min(f, 1 - f); 1 at f = 0.5
  kObjectiveCoef,      // c_j / max |c|
  kLpValue,            // x_j / max(1, |lo_j|, |hi_j|)
  kDistToLower,        // (x_j - lo_j) / (hi_j - lo_j)
  kDistToUpper,        // (hi_j - x_j) / (hi_j - lo_j)
  kColumnCount,        // nnz_j / max nnz
  kColumnMeanAbs,      // mean |A_ij| / max |A|
  kColumnMaxAbs,       // max |A_ij| / max |A|
  kPseudoCostUp,       // up estimate / max estimate over the candidates
  kPseudoCostDown,     // down estimate / max estimate over the candidates
  kDepth,              // depth / number of integer variables
  kIncumbentAgreement  // +1 if round(x_j) equals the incumbent, -1 if not, 0 without one
};

using FeatureRow = std::array<double, kNumFeatures>;
using FeatureMatrix = std::vector<FeatureRow>;

// Per-instance normalizers; every column feature is divided by these.
struct InstanceScales {
  double max_abs_cost = 1.0;
  double max_abs_coef = 1.0;
  double max_column_count = 1.0;
  std::vector<int> column_count;
  std::vector<double> column_mean_abs;
  std::vector<double> column_max_abs;

  static InstanceScales of(const MilpInstance& inst);
};

// Per-unit objective gains observed when branching each variable.
class PseudoCosts {
 public:
  PseudoCosts() = default;
  explicit PseudoCosts(int n) : up_sum_(n), down_sum_(n), up_count_(n), down_count_(n) {}

  void update(int j, bool up, double gain_per_unit);
  int count(int j, bool up) const { return up ? up_count_[j] : down_count_[j]; }
  // Average per-unit gain; falls back to the average over all variables
  // with observations, then to 1.
  double per_unit(int j, bool up) const;

 private:
  std::vector<double> up_sum_, down_sum_;
  std::vector<int> up_count_, down_count_;
  double all_up_ = 0.0, all_down_ = 0.0;
  int all_up_n_ = 0, all_down_n_ = 0;
};

// What the tree search knows about the node being branched.
struct NodeContext {
  const MilpInstance* inst = nullptr;
  const InstanceScales* scales = nullptr;
  std::span<const double> lower;
  std::span<const double> upper;
  std::span<const double> x;  // node LP solution
  double lp_objective = 0.0;
  int depth = 0;
  const std::vector<double>* incumbent = nullptr;
  const PseudoCosts* pseudo_costs = nullptr;
  const LpBasis* lp_basis = nullptr;  // may be null
};

// Throws std::invalid_argument on an empty candidate list.
FeatureMatrix extract_features(const NodeContext& node, std::span<const int> candidates);

struct ScorerParams {
  std::vector<double> theta = std::vector<double>(kNumFeatures, 0.0);
  double bias = 0.0;

  friend bool operator==(const ScorerParams&, const ScorerParams&) = default;
};

double score(const ScorerParams& p, const FeatureRow& f);
std::vector<double> score_all(const ScorerParams& p, const FeatureMatrix& m);

// Index of the largest entry; ties go to the lowest index.
int argmax(std::span<const double> v);

}  // namespace deskmip
