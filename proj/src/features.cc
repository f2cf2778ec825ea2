// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskmip/features.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace deskmip {

InstanceScales InstanceScales::of(const MilpInstance& inst) {
  InstanceScales s;
  const int n = inst.num_vars();
  s.column_count.assign(n, 0);
  s.column_mean_abs.assign(n, 0.0);
  s.column_max_abs.assign(n, 0.0);
  for (double c : inst.objective) s.max_abs_cost = std::max(s.max_abs_cost, std::abs(c));
  for (const auto& con : inst.constraints) {
    for (std::size_t k = 0; k < con.row.size(); ++k) {
      const int j = con.row.index[k];
      const double a = std::abs(con.row.value[k]);
      ++s.column_count[j];
      s.column_mean_abs[j] += a;
      s.column_max_abs[j] = std::max(s.column_max_abs[j], a);
      s.max_abs_coef = std::max(s.max_abs_coef, a);
    }
  }
  for (int j = 0; j < n; ++j) {
    if (s.column_count[j] > 0) s.column_mean_abs[j] /= s.column_count[j];
    s.max_column_count = std::max(s.max_column_count, static_cast<double>(s.column_count[j]));
  }
  return s;
}

void PseudoCosts::update(int j, bool up, double gain_per_unit) {
  if (up) {
    up_sum_[j] += gain_per_unit;
    ++up_count_[j];
    all_up_ += gain_per_unit;
    ++all_up_n_;
  } else {
    down_sum_[j] += gain_per_unit;
    ++down_count_[j];
    all_down_ += gain_per_unit;
    ++all_down_n_;
  }
}

double PseudoCosts::per_unit(int j, bool up) const {
  const int c = up ? up_count_[j] : down_count_[j];
  if (c > 0) return (up ? up_sum_[j] : down_sum_[j]) / c;
  const int all_n = up ? all_up_n_ : all_down_n_;
  if (all_n > 0) return (up ? all_up_ : all_down_) / all_n;
  return 1.0;
}

namespace {

double clip(double v) { return std::clamp(v, -1.0, 1.0); }

}  // namespace

FeatureMatrix extract_features(const NodeContext& node, std::span<const int> candidates) {
  if (candidates.empty()) throw std::invalid_argument("extract_features: no candidates");
  const MilpInstance& inst = *node.inst;
  const InstanceScales& sc = *node.scales;
  FeatureMatrix m(candidates.size());

  std::vector<double> up_est(candidates.size(), 0.0), down_est(candidates.size(), 0.0);
  double max_est = 0.0;
  if (node.pseudo_costs) {
    for (std::size_t r = 0; r < candidates.size(); ++r) {
      const int j = candidates[r];
      const double x = node.x[j];
      up_est[r] = node.pseudo_costs->per_unit(j, true) * (std::ceil(x) - x);
      down_est[r] = node.pseudo_costs->per_unit(j, false) * (x - std::floor(x));
      max_est = std::max({max_est, up_est[r], down_est[r]});
    }
  }
  const double n_int = std::max(1, inst.num_int());

  for (std::size_t r = 0; r < candidates.size(); ++r) {
    const int j = candidates[r];
    const double x = node.x[j];
    const double lo = node.lower[j];
    const double hi = node.upper[j];
    const double f = x - std::floor(x);
    const double width = hi - lo;
    auto& row = m[r];
    row[kFractionality] = clip(2.0 * std::min(f, 1.0 - f));
    row[kObjectiveCoef] = clip(inst.objective[j] / sc.max_abs_cost);
    row[kLpValue] = clip(x / std::max({1.0, std::abs(lo), std::abs(hi)}));
    row[kDistToLower] = width > 0 ? clip((x - lo) / width) : 0.0;
    row[kDistToUpper] = width > 0 ? clip((hi - x) / width) : 0.0;
    row[kColumnCount] = clip(sc.column_count[j] / sc.max_column_count);
    row[kColumnMeanAbs] = clip(sc.column_mean_abs[j] / sc.max_abs_coef);
    row[kColumnMaxAbs] = clip(sc.column_max_abs[j] / sc.max_abs_coef);
    row[kPseudoCostUp] = max_est > 0 ? clip(up_est[r] / max_est) : 0.0;
    row[kPseudoCostDown] = max_est > 0 ? clip(down_est[r] / max_est) : 0.0;
    row[kDepth] = clip(node.depth / n_int);
    if (node.incumbent)
      row[kIncumbentAgreement] = std::round(x) == (*node.incumbent)[j] ? 1.0 : -1.0;
    else
      row[kIncumbentAgreement] = 0.0;
  }
  return m;
}

double score(const ScorerParams& p, const FeatureRow& f) {
  double s = p.bias;
  for (int k = 0; k < kNumFeatures; ++k) s += p.theta[k] * f[k];
  return s;
}

std::vector<double> score_all(const ScorerParams& p, const FeatureMatrix& m) {
  std::vector<double> out(m.size());
  for (std::size_t r = 0; r < m.size(); ++r) out[r] = score(p, m[r]);
  return out;
}

int argmax(std::span<const double> v) {
  int best = 0;
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] > v[best]) best = static_cast<int>(k);
  return best;
}

}  // namespace deskmip
