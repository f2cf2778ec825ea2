// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskmip/model.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace deskmip {

const char* to_string(RowSense sense) {
  switch (sense) {
    case RowSense::kLe:
      return "LE";
    case RowSense::kGe:
      return "GE";
    case RowSense::kEq:
      return "EQ";
  }
  return "?";
}

double SparseRow::dot(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t k = 0; k < index.size(); ++k) s += value[k] * x[index[k]];
  return s;
}

int MilpInstance::num_int() const {
  return static_cast<int>(std::count(is_integer.begin(), is_integer.end(), true));
}

std::vector<int> MilpInstance::integer_vars() const {
  std::vector<int> out;
  for (int j = 0; j < num_vars(); ++j)
    if (is_integer[j]) out.push_back(j);
  return out;
}

int MilpInstance::add_var(double lo, double hi, double cost, bool integer, std::string var_name) {
  const int j = num_vars();
  objective.push_back(cost);
  lower.push_back(lo);
  upper.push_back(hi);
  is_integer.push_back(integer);
  var_names.push_back(var_name.empty() ? "C" + std::to_string(j) : std::move(var_name));
  return j;
}

int MilpInstance::add_row(SparseRow row, RowSense sense, double rhs, std::string row_name) {
  const int i = num_rows();
  if (!std::is_sorted(row.index.begin(), row.index.end())) {
    std::vector<std::size_t> perm(row.size());
    for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = k;
    std::sort(perm.begin(), perm.end(),
              [&](std::size_t a, std::size_t b) { return row.index[a] < row.index[b]; });
    SparseRow sorted;
    for (std::size_t k : perm) sorted.add(row.index[k], row.value[k]);
    row = std::move(sorted);
  }
  constraints.push_back(Constraint{std::move(row), sense, rhs});
  row_names.push_back(row_name.empty() ? "R" + std::to_string(i) : std::move(row_name));
  return i;
}

double MilpInstance::evaluate(std::span<const double> x) const {
  double s = 0.0;
  for (int j = 0; j < num_vars(); ++j) s += objective[j] * x[j];
  return s;
}

void MilpInstance::validate() const {
  const auto n = objective.size();
  if (lower.size() != n || upper.size() != n || is_integer.size() != n || var_names.size() != n)
    throw ModelError("variable tables have inconsistent sizes");
  if (row_names.size() != constraints.size())
    throw ModelError("row name table size differs from row count");
  for (std::size_t j = 0; j < n; ++j) {
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j])
      throw ModelError("variable " + var_names[j] + " has lo > hi");
    if (lower[j] == kInf || upper[j] == -kInf)
      throw ModelError("variable " + var_names[j] + " has an empty domain");
  }
  std::vector<int> seen(n, -1);
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const auto& r = constraints[i].row;
    if (r.index.size() != r.value.size())
      throw ModelError("row " + row_names[i] + " index/value size mismatch");
    for (int j : r.index) {
      if (j < 0 || static_cast<std::size_t>(j) >= n)
        throw ModelError("row " + row_names[i] + " references variable out of range");
      if (seen[j] == static_cast<int>(i))
        throw ModelError("row " + row_names[i] + " has duplicate index " + std::to_string(j));
      seen[j] = static_cast<int>(i);
    }
  }
}

bool MilpInstance::integers_bounded() const {
  for (int j = 0; j < num_vars(); ++j)
    if (is_integer[j] && (!std::isfinite(lower[j]) || !std::isfinite(upper[j]))) return false;
  return true;
}

bool operator==(const SparseRow& a, const SparseRow& b) {
  return a.index == b.index && a.value == b.value;
}

bool operator==(const Constraint& a, const Constraint& b) {
  return a.row == b.row && a.sense == b.sense && a.rhs == b.rhs;
}

bool operator==(const MilpInstance& a, const MilpInstance& b) {
  return a.name == b.name && a.objective == b.objective && a.lower == b.lower &&
         a.upper == b.upper && a.is_integer == b.is_integer && a.var_names == b.var_names &&
         a.constraints == b.constraints && a.row_names == b.row_names;
}

namespace {

bool close(double x, double y, double tol) {
  if (x == y) return true;  // covers matching infinities
  return std::abs(x - y) <= tol * std::max(1.0, std::max(std::abs(x), std::abs(y)));
}

bool close(const std::vector<double>& x, const std::vector<double>& y, double tol) {
  if (x.size() != y.size()) return false;
  for (std::size_t k = 0; k < x.size(); ++k)
    if (!close(x[k], y[k], tol)) return false;
  return true;
}

}  // namespace

bool approx_equal(const MilpInstance& a, const MilpInstance& b, double tol) {
  if (a.name != b.name || a.is_integer != b.is_integer || a.var_names != b.var_names ||
      a.row_names != b.row_names || a.constraints.size() != b.constraints.size())
    return false;
  if (!close(a.objective, b.objective, tol) || !close(a.lower, b.lower, tol) ||
      !close(a.upper, b.upper, tol))
    return false;
  for (std::size_t i = 0; i < a.constraints.size(); ++i) {
    const auto& ca = a.constraints[i];
    const auto& cb = b.constraints[i];
    if (ca.sense != cb.sense || ca.row.index != cb.row.index || !close(ca.rhs, cb.rhs, tol) ||
        !close(ca.row.value, cb.row.value, tol))
      return false;
  }
  return true;
}

FeasibilityReport check_feasibility(const MilpInstance& inst, std::span<const double> x,
                                    double tol) {
  if (static_cast<int>(x.size()) != inst.num_vars())
    throw ModelError("solution has " + std::to_string(x.size()) + " entries, instance has " +
                     std::to_string(inst.num_vars()) + " variables");
  if (!(tol > 0)) throw ModelError("tolerance must be positive");
  FeasibilityReport rep;
  for (int i = 0; i < inst.num_rows(); ++i) {
    const auto& c = inst.constraints[i];
    const double act = c.row.dot(x);
    double viol = 0.0;
    switch (c.sense) {
      case RowSense::kLe:
        viol = act - c.rhs;
        break;
      case RowSense::kGe:
        viol = c.rhs - act;
        break;
      case RowSense::kEq:
        viol = std::abs(act - c.rhs);
        break;
    }
    if (viol > rep.worst_constraint_violation) {
      rep.worst_constraint_violation = viol;
      rep.worst_row = i;
    }
  }
  for (int j = 0; j < inst.num_vars(); ++j) {
    const double v = x[j];
    if (std::isnan(v)) {
      rep.worst_bound_violation = kInf;
      continue;
    }
    rep.worst_bound_violation =
        std::max({rep.worst_bound_violation, inst.lower[j] - v, v - inst.upper[j]});
    if (inst.is_integer[j])
      rep.worst_integrality_violation =
          std::max(rep.worst_integrality_violation, integrality_distance(v));
  }
  rep.feasible = rep.worst_constraint_violation <= tol && rep.worst_bound_violation <= tol &&
                 rep.worst_integrality_violation <= tol;
  return rep;
}

MilpInstance fix_variables(const MilpInstance& inst, const std::map<int, double>& fixings) {
  MilpInstance out = inst;
  for (const auto& [j, v] : fixings) {
    if (j < 0 || j >= inst.num_vars())
      throw ModelError("fixing references variable " + std::to_string(j) + " out of range");
    if (v < inst.lower[j] - 1e-9 || v > inst.upper[j] + 1e-9)
      throw ModelError("fixing " + inst.var_names[j] + "=" + std::to_string(v) +
                       " is outside its bounds");
    if (inst.is_integer[j] && integrality_distance(v) > 1e-9)
      throw ModelError("fractional fixing of integer variable " + inst.var_names[j]);
    const double val = inst.is_integer[j] ? std::round(v) : v;
    out.lower[j] = val;
    out.upper[j] = val;
  }
  return out;
}

MilpInstance relax_integrality(const MilpInstance& inst, const std::set<int>& vars) {
  MilpInstance out = inst;
  for (int j : vars) {
    if (j < 0 || j >= inst.num_vars())
      throw ModelError("relaxation references variable " + std::to_string(j) + " out of range");
    out.is_integer[j] = false;
  }
  return out;
}

MilpInstance relax_all(const MilpInstance& inst) {
  MilpInstance out = inst;
  std::fill(out.is_integer.begin(), out.is_integer.end(), false);
  return out;
}

MilpInstance drop_constraints(const MilpInstance& inst, const std::set<int>& rows) {
  MilpInstance out = inst;
  if (rows.empty()) return out;
  out.constraints.clear();
  out.row_names.clear();
  for (int i = 0; i < inst.num_rows(); ++i) {
    if (rows.count(i)) continue;
    out.constraints.push_back(inst.constraints[i]);
    out.row_names.push_back(inst.row_names[i]);
  }
  for (int i : rows)
    if (i < 0 || i >= inst.num_rows())
      throw ModelError("dropped row " + std::to_string(i) + " out of range");
  return out;
}

}  // namespace deskmip
