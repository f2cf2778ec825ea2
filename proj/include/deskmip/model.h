// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

// Mixed-integer linear program data model. Everything is a minimization
// problem over n variables with per-variable bounds and integrality flags, and
// m sparse rows each carrying its own sense.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace deskmip {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense : std::uint8_t { kLe, kGe, kEq };

const char* to_string(RowSense sense);

struct SparseRow {
  std::vector<int> index;
  std::vector<double> value;

  void add(int j, double v) {
    index.push_back(j);
    value.push_back(v);
  }
  std::size_t size() const { return index.size(); }
  double dot(std::span<const double> x) const;
};

struct Constraint {
  SparseRow row;
  RowSense sense = RowSense::kLe;
  double rhs = 0.0;
};

// Thrown when an instance or an operation argument violates the data model.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MilpInstance {
  std::string name = "instance";
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<bool> is_integer;
  std::vector<std::string> var_names;
  std::vector<Constraint> constraints;
  std::vector<std::string> row_names;

  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_rows() const { return static_cast<int>(constraints.size()); }
  int num_int() const;
  std::vector<int> integer_vars() const;

  // Appends a variable and returns its index.
  int add_var(double lo, double hi, double cost, bool integer, std::string var_name = {});
  // Appends a row and returns its index.
  int add_row(SparseRow row, RowSense sense, double rhs, std::string row_name = {});

  double evaluate(std::span<const double> x) const;

  // Checks the structural invariants and throws ModelError on the first
  // violation: index range, duplicate row indices, lo <= hi, table sizes.
  void validate() const;

  // True when every integer variable has finite bounds.
  bool integers_bounded() const;
};

bool operator==(const SparseRow& a, const SparseRow& b);
bool operator==(const Constraint& a, const Constraint& b);
bool operator==(const MilpInstance& a, const MilpInstance& b);

// Structural equality with values compared to a relative tolerance.
bool approx_equal(const MilpInstance& a, const MilpInstance& b, double tol);

struct Solution {
  std::vector<double> values;
  double objective = 0.0;

  Solution() = default;
  Solution(const MilpInstance& inst, std::vector<double> x)
      : values(std::move(x)), objective(inst.evaluate(values)) {}
};

struct FeasibilityReport {
  bool feasible = false;
  double worst_constraint_violation = 0.0;
  double worst_integrality_violation = 0.0;
  double worst_bound_violation = 0.0;
  int worst_row = -1;
};

FeasibilityReport check_feasibility(const MilpInstance& inst, std::span<const double> x,
                                    double tol);
inline FeasibilityReport check_feasibility(const MilpInstance& inst, const Solution& sol,
                                           double tol) {
  return check_feasibility(inst, sol.values, tol);
}

// Returns a copy with lo = hi = value for every fixed variable.
MilpInstance fix_variables(const MilpInstance& inst, const std::map<int, double>& fixings);

// Returns a copy where the listed variables are continuous.
MilpInstance relax_integrality(const MilpInstance& inst, const std::set<int>& vars);
MilpInstance relax_all(const MilpInstance& inst);

// Returns a copy without the listed rows (indices into inst.constraints).
MilpInstance drop_constraints(const MilpInstance& inst, const std::set<int>& rows);

inline double integrality_distance(double v) { return std::abs(v - std::round(v)); }

}  // namespace deskmip
