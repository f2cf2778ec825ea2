// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

// Bounded-variable primal simplex for LP relaxations.
//
// Rows are turned into equalities with one bounded slack each; phase 1 adds an
// artificial column for every row whose slack cannot absorb the initial
// residual and minimizes their sum. The basis inverse is kept dense and
// updated in product form, with a fresh Gauss-Jordan factorization every
// refactor_frequency pivots. Pricing is Dantzig (largest reduced cost) and
// falls back to Bland's rule after 3 * (n + m) consecutive degenerate pivots
// until the next non-degenerate step.
//
// A solve may start from a previous optimal basis. The bounded dual simplex
// then restores primal feasibility after bound changes, which is how tree
// nodes and strong-branching probes reuse their parent's work. A warm basis
// that is singular or cannot be made dual feasible by bound flips falls back
// to a cold start.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "deskmip/clock.h"
#include "deskmip/model.h"

namespace deskmip {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

const char* to_string(LpStatus s);

enum class PivotRule { kDantzig, kBland };

struct LpOptions {
  int iteration_limit = 100000;
  PivotRule pivot_rule = PivotRule::kDantzig;
  int refactor_frequency = 100;
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-10;
  // When set, every pivot is charged to this clock, and an expired deadline
  // stops the solve with kIterationLimit.
  Clock* clock = nullptr;
  Deadline deadline;
};

// Basic column per row (structurals [0, n), slacks [n, n + m)) and, for every
// column, whether a nonbasic one sits at its upper bound.
struct LpBasis {
  std::vector<int> head;
  std::vector<std::uint8_t> at_upper;
  bool empty() const { return head.empty(); }
};

struct LpResult {
  LpStatus status = LpStatus::kIterationLimit;
  std::vector<double> x;  // structural values, valid when kOptimal
  double objective = 0.0;
  int iterations = 0;
  double phase1_objective = 0.0;
  LpBasis basis;  // valid when kOptimal
  bool warm_started = false;
};

// Holds the column-wise copy of an instance so that many solves with different
// variable bounds (branch-and-bound nodes, probes) share the setup cost.
class LpSolver {
 public:
  explicit LpSolver(const MilpInstance& inst);

  LpResult solve(const LpOptions& opts = {}) const;
  LpResult solve(std::span<const double> lower, std::span<const double> upper,
                 const LpOptions& opts = {}, const LpBasis* warm = nullptr) const;

  int num_vars() const { return n_; }
  int num_rows() const { return m_; }

 private:
  int n_ = 0;
  int m_ = 0;
  std::vector<double> cost_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<RowSense> sense_;
  std::vector<double> rhs_;
  std::vector<int> col_start_;
  std::vector<int> col_row_;
  std::vector<double> col_val_;
};

LpResult solve_lp(const MilpInstance& inst, int iteration_limit = 100000);

}  // namespace deskmip
