// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskmip/lp.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>

namespace deskmip {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal:
      return "optimal";
    case LpStatus::kInfeasible:
      return "infeasible";
    case LpStatus::kUnbounded:
      return "unbounded";
    case LpStatus::kIterationLimit:
      return "iteration_limit";
  }
  return "?";
}

namespace {

enum class VarState : std::uint8_t { kBasic, kAtLower, kAtUpper, kFree };

enum class PhaseResult { kOptimal, kUnbounded, kLimit };

constexpr double kStepEps = 1e-12;

// Column layout: [0, n) structurals, [n, n + m) slacks, [n + m, n + 2m)
// artificials. Slack i has the unit column e_i; artificial i has sigma_i e_i.
class Simplex {
 public:
  Simplex(int n, int m, const std::vector<int>& cs, const std::vector<int>& cr,
          const std::vector<double>& cv, const LpOptions& opts)
      : n_(n), m_(m), total_(n + 2 * m), cs_(cs), cr_(cr), cv_(cv), opts_(opts) {}

  // Dual simplex from a previous basis. Empty when the basis is unusable and
  // the caller should start cold.
  std::optional<LpResult> run_warm(std::span<const double> cost, std::span<const double> lower,
                                   std::span<const double> upper,
                                   std::span<const RowSense> sense, std::span<const double> rhs,
                                   const LpBasis& basis) {
    LpResult res;
    if (static_cast<int>(basis.head.size()) != m_ ||
        static_cast<int>(basis.at_upper.size()) != n_ + m_)
      return std::nullopt;
    init_arrays(rhs);
    for (int j = 0; j < n_; ++j) {
      lo_[j] = lower[j];
      hi_[j] = upper[j];
      if (lo_[j] > hi_[j]) {
        res.status = LpStatus::kInfeasible;
        res.phase1_objective = lo_[j] - hi_[j];
        return res;
      }
    }
    set_slack_bounds(sense);
    for (int i = 0; i < m_; ++i) {
      const int a = n_ + m_ + i;
      lo_[a] = hi_[a] = 0.0;
      state_[a] = VarState::kAtLower;
    }
    std::vector<char> basic(n_ + m_, 0);
    for (int i = 0; i < m_; ++i) {
      const int b = basis.head[i];
      if (b < 0 || b >= n_ + m_ || basic[b]) return std::nullopt;
      basic[b] = 1;
      head_[i] = b;
      state_[b] = VarState::kBasic;
    }
    for (int j = 0; j < n_ + m_; ++j) {
      if (basic[j]) continue;
      place_at_bound(j, basis.at_upper[j] != 0);
    }
    for (int j = 0; j < n_; ++j) cost_[j] = cost[j];
    if (!refactor()) return std::nullopt;

    // Bound flips make the basis dual feasible where possible.
    compute_duals();
    bool flipped = false;
    for (int j = 0; j < n_ + m_; ++j) {
      if (state_[j] == VarState::kBasic || fixed(j)) continue;
      const double d = reduced_cost(j);
      if (state_[j] == VarState::kAtLower && d < -opts_.optimality_tol) {
        if (!std::isfinite(hi_[j])) return std::nullopt;
        state_[j] = VarState::kAtUpper, x_[j] = hi_[j], flipped = true;
      } else if (state_[j] == VarState::kAtUpper && d > opts_.optimality_tol) {
        if (!std::isfinite(lo_[j])) return std::nullopt;
        state_[j] = VarState::kAtLower, x_[j] = lo_[j], flipped = true;
      } else if (state_[j] == VarState::kFree && std::abs(d) > opts_.optimality_tol) {
        return std::nullopt;
      }
    }
    if (flipped) recompute_basic_values();

    const long dual_cap = 50L * (n_ + m_) + 100;
    long dual_iters = 0;
    std::vector<double> rho(m_);
    for (;;) {
      if (iterations_ >= opts_.iteration_limit || opts_.deadline.expired()) {
        res.status = LpStatus::kIterationLimit;
        res.iterations = iterations_;
        return res;
      }
      if (++dual_iters > dual_cap) return std::nullopt;
      int r = -1;
      double worst = opts_.feasibility_tol;
      for (int i = 0; i < m_; ++i) {
        const int b = head_[i];
        const double v = std::max(lo_[b] - x_[b], x_[b] - hi_[b]);
        if (v > worst) worst = v, r = i;
      }
      if (r < 0) break;
      const int b = head_[r];
      const bool going_up = x_[b] < lo_[b];
      for (int k = 0; k < m_; ++k) rho[k] = binv_[idx(r, k)];
      compute_duals();
      int q = -1;
      double best_ratio = kInf, best_alpha = 0.0;
      for (int j = 0; j < n_ + m_; ++j) {
        if (state_[j] == VarState::kBasic || fixed(j)) continue;
        double a = 0.0;
        if (j < n_) {
          for (int k = cs_[j]; k < cs_[j + 1]; ++k) a += rho[cr_[k]] * cv_[k];
        } else {
          a = rho[j - n_];
        }
        if (std::abs(a) <= opts_.pivot_tol) continue;
        // x_b changes by -a per unit increase of x_j.
        bool eligible = false;
        switch (state_[j]) {
          case VarState::kAtLower:
            eligible = going_up ? a < 0 : a > 0;
            break;
          case VarState::kAtUpper:
            eligible = going_up ? a > 0 : a < 0;
            break;
          case VarState::kFree:
            eligible = true;
            break;
          case VarState::kBasic:
            break;
        }
        if (!eligible) continue;
        const double ratio = std::abs(reduced_cost(j)) / std::abs(a);
        if (ratio < best_ratio - kStepEps ||
            (ratio <= best_ratio + kStepEps && std::abs(a) > best_alpha)) {
          best_ratio = ratio;
          best_alpha = std::abs(a);
          q = j;
        }
      }
      if (q < 0) {
        res.status = LpStatus::kInfeasible;
        res.phase1_objective = worst;
        res.iterations = iterations_;
        return res;
      }
      ftran(q);
      if (std::abs(alpha_[r]) <= opts_.pivot_tol) return std::nullopt;
      x_[b] = going_up ? lo_[b] : hi_[b];
      state_[b] = going_up || fixed(b) ? VarState::kAtLower : VarState::kAtUpper;
      head_[r] = q;
      state_[q] = VarState::kBasic;
      pivot_inverse(r);
      ++since_refactor_;
      ++iterations_;
      if (opts_.clock) opts_.clock->charge(opts_.clock->costs().pivot_seconds);
      if (since_refactor_ >= opts_.refactor_frequency) {
        if (!refactor()) return std::nullopt;
      } else {
        recompute_basic_values();
      }
    }
    degenerate_ = 0;
    bland_ = false;
    auto out = phase2(cost);
    out.warm_started = true;
    return out;
  }

  LpResult run(std::span<const double> cost, std::span<const double> lower,
               std::span<const double> upper, std::span<const RowSense> sense,
               std::span<const double> rhs) {
    LpResult res;
    init_arrays(rhs);
    for (int j = 0; j < n_; ++j) {
      lo_[j] = lower[j];
      hi_[j] = upper[j];
      if (lo_[j] > hi_[j]) {
        res.status = LpStatus::kInfeasible;
        res.phase1_objective = lo_[j] - hi_[j];
        return res;
      }
      place_at_bound(j, false);
    }
    std::vector<double> resid = rhs_;
    for (int j = 0; j < n_; ++j) {
      if (x_[j] == 0.0) continue;
      for (int k = cs_[j]; k < cs_[j + 1]; ++k) resid[cr_[k]] -= cv_[k] * x_[j];
    }
    set_slack_bounds(sense);
    bool need_phase1 = false;
    for (int i = 0; i < m_; ++i) {
      const int s = n_ + i;
      const int a = n_ + m_ + i;
      const double r = resid[i];
      if (r >= lo_[s] && r <= hi_[s]) {
        x_[s] = r;
        state_[s] = VarState::kBasic;
        head_[i] = s;
        lo_[a] = hi_[a] = 0.0;
        state_[a] = VarState::kAtLower;
      } else {
        const double c = std::clamp(r, lo_[s], hi_[s]);
        x_[s] = c;
        state_[s] = c == lo_[s] ? VarState::kAtLower : VarState::kAtUpper;
        sigma_[i] = r > c ? 1.0 : -1.0;
        x_[a] = std::abs(r - c);
        lo_[a] = 0.0;
        hi_[a] = kInf;
        state_[a] = VarState::kBasic;
        head_[i] = a;
        cost_[a] = 1.0;
        need_phase1 = true;
      }
    }
    binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) binv_[idx(i, i)] = head_[i] >= n_ + m_ ? sigma_[i] : 1.0;

    if (need_phase1) {
      const PhaseResult p1 = iterate();
      double infeas = 0.0;
      for (int i = 0; i < m_; ++i) infeas += std::max(0.0, x_[n_ + m_ + i]);
      res.phase1_objective = infeas;
      if (p1 == PhaseResult::kLimit) {
        res.status = LpStatus::kIterationLimit;
        res.iterations = iterations_;
        return res;
      }
      if (infeas > opts_.feasibility_tol) {
        res.status = LpStatus::kInfeasible;
        res.iterations = iterations_;
        return res;
      }
      for (int i = 0; i < m_; ++i) {
        const int a = n_ + m_ + i;
        cost_[a] = 0.0;
        hi_[a] = 0.0;
        if (state_[a] != VarState::kBasic) {
          x_[a] = 0.0;
          state_[a] = VarState::kAtLower;
        }
      }
    }
    for (int j = 0; j < n_; ++j) cost_[j] = cost[j];
    degenerate_ = 0;
    bland_ = false;
    auto out = phase2(cost);
    out.phase1_objective = res.phase1_objective;
    return out;
  }

 private:
  void init_arrays(std::span<const double> rhs) {
    rhs_.assign(rhs.begin(), rhs.end());
    lo_.assign(total_, 0.0);
    hi_.assign(total_, 0.0);
    x_.assign(total_, 0.0);
    cost_.assign(total_, 0.0);
    sigma_.assign(m_, 1.0);
    state_.assign(total_, VarState::kAtLower);
    head_.assign(m_, -1);
    y_.assign(m_, 0.0);
    alpha_.assign(m_, 0.0);
  }

  void set_slack_bounds(std::span<const RowSense> sense) {
    for (int i = 0; i < m_; ++i) {
      const int s = n_ + i;
      switch (sense[i]) {
        case RowSense::kLe:
          lo_[s] = 0.0, hi_[s] = kInf;
          break;
        case RowSense::kGe:
          lo_[s] = -kInf, hi_[s] = 0.0;
          break;
        case RowSense::kEq:
          lo_[s] = 0.0, hi_[s] = 0.0;
          break;
      }
    }
  }

  // Nonbasic placement: the preferred bound when finite, else the other one,
  // else free at zero.
  void place_at_bound(int j, bool prefer_upper) {
    if (prefer_upper && std::isfinite(hi_[j])) {
      x_[j] = hi_[j], state_[j] = VarState::kAtUpper;
    } else if (std::isfinite(lo_[j])) {
      x_[j] = lo_[j], state_[j] = VarState::kAtLower;
    } else if (std::isfinite(hi_[j])) {
      x_[j] = hi_[j], state_[j] = VarState::kAtUpper;
    } else {
      x_[j] = 0.0, state_[j] = VarState::kFree;
    }
  }

  LpResult phase2(std::span<const double> cost) {
    LpResult res;
    const PhaseResult p2 = iterate();
    res.iterations = iterations_;
    if (p2 == PhaseResult::kLimit) {
      res.status = LpStatus::kIterationLimit;
      return res;
    }
    if (p2 == PhaseResult::kUnbounded) {
      res.status = LpStatus::kUnbounded;
      return res;
    }
    res.status = LpStatus::kOptimal;
    res.x.assign(x_.begin(), x_.begin() + n_);
    for (int j = 0; j < n_; ++j) {
      // Basic values may sit a rounding error outside their bounds.
      if (res.x[j] < lo_[j] && res.x[j] > lo_[j] - opts_.feasibility_tol) res.x[j] = lo_[j];
      if (res.x[j] > hi_[j] && res.x[j] < hi_[j] + opts_.feasibility_tol) res.x[j] = hi_[j];
    }
    double obj = 0.0;
    for (int j = 0; j < n_; ++j) obj += cost[j] * res.x[j];
    res.objective = obj;
    // A basic artificial sits at zero; its slack has the same column up to
    // sign, so it takes the artificial's place in the exported basis.
    res.basis.head.resize(m_);
    for (int i = 0; i < m_; ++i) res.basis.head[i] = head_[i] >= n_ + m_ ? head_[i] - m_ : head_[i];
    res.basis.at_upper.assign(n_ + m_, 0);
    for (int j = 0; j < n_ + m_; ++j) res.basis.at_upper[j] = state_[j] == VarState::kAtUpper;
    return res;
  }

 private:
  std::size_t idx(int r, int c) const { return static_cast<std::size_t>(r) * m_ + c; }

  bool fixed(int j) const { return lo_[j] == hi_[j]; }

  void compute_duals() {
    std::fill(y_.begin(), y_.end(), 0.0);
    for (int i = 0; i < m_; ++i) {
      const double c = cost_[head_[i]];
      if (c == 0.0) continue;
      const double* row = &binv_[idx(i, 0)];
      for (int k = 0; k < m_; ++k) y_[k] += c * row[k];
    }
  }

  double reduced_cost(int j) const {
    if (j < n_) {
      double d = cost_[j];
      for (int k = cs_[j]; k < cs_[j + 1]; ++k) d -= y_[cr_[k]] * cv_[k];
      return d;
    }
    if (j < n_ + m_) return cost_[j] - y_[j - n_];
    const int i = j - n_ - m_;
    return cost_[j] - sigma_[i] * y_[i];
  }

  void ftran(int q) {
    std::fill(alpha_.begin(), alpha_.end(), 0.0);
    auto add_col = [&](int r, double v) {
      for (int i = 0; i < m_; ++i) alpha_[i] += binv_[idx(i, r)] * v;
    };
    if (q < n_) {
      for (int k = cs_[q]; k < cs_[q + 1]; ++k) add_col(cr_[k], cv_[k]);
    } else if (q < n_ + m_) {
      add_col(q - n_, 1.0);
    } else {
      add_col(q - n_ - m_, sigma_[q - n_ - m_]);
    }
  }

  void column_into(int q, std::vector<double>& dense, int col) const {
    if (q < n_) {
      for (int k = cs_[q]; k < cs_[q + 1]; ++k) dense[idx(cr_[k], col)] = cv_[k];
    } else if (q < n_ + m_) {
      dense[idx(q - n_, col)] = 1.0;
    } else {
      dense[idx(q - n_ - m_, col)] = sigma_[q - n_ - m_];
    }
  }

  // Gauss-Jordan inversion of the current basis. Keeps the old inverse when
  // the basis looks singular.
  bool refactor() {
    since_refactor_ = 0;
    if (m_ == 0) return true;
    std::vector<double> b(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) column_into(head_[i], b, i);
    std::vector<double> inv(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) inv[idx(i, i)] = 1.0;
    for (int c = 0; c < m_; ++c) {
      int piv = -1;
      double best = 0.0;
      for (int r = c; r < m_; ++r) {
        const double v = std::abs(b[idx(r, c)]);
        if (v > best) best = v, piv = r;
      }
      if (piv < 0 || best < 1e-12) return false;
      if (piv != c) {
        for (int k = 0; k < m_; ++k) {
          std::swap(b[idx(piv, k)], b[idx(c, k)]);
          std::swap(inv[idx(piv, k)], inv[idx(c, k)]);
        }
      }
      const double p = b[idx(c, c)];
      for (int k = 0; k < m_; ++k) {
        b[idx(c, k)] /= p;
        inv[idx(c, k)] /= p;
      }
      for (int r = 0; r < m_; ++r) {
        if (r == c) continue;
        const double f = b[idx(r, c)];
        if (f == 0.0) continue;
        double* br = &b[idx(r, 0)];
        const double* bc = &b[idx(c, 0)];
        double* ir = &inv[idx(r, 0)];
        const double* ic = &inv[idx(c, 0)];
        for (int k = c; k < m_; ++k) br[k] -= f * bc[k];
        for (int k = 0; k < m_; ++k) ir[k] -= f * ic[k];
      }
    }
    // Row c of inv now belongs to basis position c (columns of B were the
    // basis positions, so inv * B = I row-for-position).
    binv_.swap(inv);
    recompute_basic_values();
    return true;
  }

  void recompute_basic_values() {
    std::vector<double> r = rhs_;
    for (int j = 0; j < total_; ++j) {
      if (state_[j] == VarState::kBasic || x_[j] == 0.0) continue;
      if (j < n_) {
        for (int k = cs_[j]; k < cs_[j + 1]; ++k) r[cr_[k]] -= cv_[k] * x_[j];
      } else if (j < n_ + m_) {
        r[j - n_] -= x_[j];
      } else {
        r[j - n_ - m_] -= sigma_[j - n_ - m_] * x_[j];
      }
    }
    for (int i = 0; i < m_; ++i) {
      double v = 0.0;
      const double* row = &binv_[idx(i, 0)];
      for (int k = 0; k < m_; ++k) v += row[k] * r[k];
      x_[head_[i]] = v;
    }
  }

  void pivot_inverse(int r) {
    const double piv = alpha_[r];
    double* pr = &binv_[idx(r, 0)];
    for (int k = 0; k < m_; ++k) pr[k] /= piv;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = alpha_[i];
      if (f == 0.0) continue;
      double* ri = &binv_[idx(i, 0)];
      for (int k = 0; k < m_; ++k) ri[k] -= f * pr[k];
    }
  }

  PhaseResult iterate() {
    const long stall_limit = 3L * (n_ + m_);
    bool fresh = false;
    for (;;) {
      if (iterations_ >= opts_.iteration_limit) return PhaseResult::kLimit;
      if (opts_.deadline.expired()) return PhaseResult::kLimit;
      compute_duals();
      const bool bland = bland_ || opts_.pivot_rule == PivotRule::kBland;
      int q = -1;
      double dq = 0.0;
      double best = 0.0;
      for (int j = 0; j < total_; ++j) {
        if (state_[j] == VarState::kBasic || fixed(j)) continue;
        const double d = reduced_cost(j);
        bool eligible = false;
        switch (state_[j]) {
          case VarState::kAtLower:
            eligible = d < -opts_.optimality_tol;
            break;
          case VarState::kAtUpper:
            eligible = d > opts_.optimality_tol;
            break;
          case VarState::kFree:
            eligible = std::abs(d) > opts_.optimality_tol;
            break;
          case VarState::kBasic:
            break;
        }
        if (!eligible) continue;
        if (bland) {
          q = j, dq = d;
          break;
        }
        if (std::abs(d) > best) best = std::abs(d), q = j, dq = d;
      }
      if (q < 0) {
        if (!fresh && since_refactor_ > 0) {
          refactor();
          fresh = true;
          continue;
        }
        return PhaseResult::kOptimal;
      }
      fresh = false;
      const double dir = dq < 0 ? 1.0 : -1.0;
      ftran(q);

      double theta = kInf;
      int leave = -1;  // -2 marks a bound flip of the entering variable
      bool leave_upper = false;
      double leave_alpha = 0.0;
      if (std::isfinite(lo_[q]) && std::isfinite(hi_[q])) {
        theta = hi_[q] - lo_[q];
        leave = -2;
      }
      for (int i = 0; i < m_; ++i) {
        if (std::abs(alpha_[i]) <= opts_.pivot_tol) continue;
        const int b = head_[i];
        const double a = dir * alpha_[i];
        double t;
        bool to_upper;
        if (a > 0) {
          if (!std::isfinite(lo_[b])) continue;
          t = (x_[b] - lo_[b]) / a;
          to_upper = false;
        } else {
          if (!std::isfinite(hi_[b])) continue;
          t = (hi_[b] - x_[b]) / -a;
          to_upper = true;
        }
        t = std::max(t, 0.0);
        bool take = false;
        if (t < theta - kStepEps) {
          take = true;
        } else if (t <= theta + kStepEps && leave >= 0) {
          take = bland ? b < head_[leave] : std::abs(alpha_[i]) > leave_alpha;
        }
        if (take) {
          theta = t;
          leave = i;
          leave_upper = to_upper;
          leave_alpha = std::abs(alpha_[i]);
        }
      }
      if (leave == -1) return PhaseResult::kUnbounded;

      if (theta != 0.0) {
        x_[q] += dir * theta;
        for (int i = 0; i < m_; ++i)
          if (alpha_[i] != 0.0) x_[head_[i]] -= dir * theta * alpha_[i];
      }
      if (leave == -2) {
        state_[q] = state_[q] == VarState::kAtLower ? VarState::kAtUpper : VarState::kAtLower;
        x_[q] = state_[q] == VarState::kAtLower ? lo_[q] : hi_[q];
      } else {
        const int b = head_[leave];
        x_[b] = leave_upper ? hi_[b] : lo_[b];
        state_[b] = leave_upper && !fixed(b) ? VarState::kAtUpper : VarState::kAtLower;
        head_[leave] = q;
        state_[q] = VarState::kBasic;
        pivot_inverse(leave);
        ++since_refactor_;
      }
      ++iterations_;
      if (opts_.clock) opts_.clock->charge(opts_.clock->costs().pivot_seconds);

      if (theta <= kStepEps) {
        if (++degenerate_ > stall_limit) bland_ = true;
      } else {
        degenerate_ = 0;
        bland_ = false;
      }
      if (since_refactor_ >= opts_.refactor_frequency) refactor();
    }
  }

  int n_, m_, total_;
  const std::vector<int>& cs_;
  const std::vector<int>& cr_;
  const std::vector<double>& cv_;
  LpOptions opts_;

  std::vector<double> rhs_, lo_, hi_, x_, cost_, sigma_;
  std::vector<VarState> state_;
  std::vector<int> head_;
  std::vector<double> binv_;
  std::vector<double> y_, alpha_;
  int iterations_ = 0;
  int since_refactor_ = 0;
  long degenerate_ = 0;
  bool bland_ = false;
};

}  // namespace

LpSolver::LpSolver(const MilpInstance& inst)
    : n_(inst.num_vars()),
      m_(inst.num_rows()),
      cost_(inst.objective),
      lower_(inst.lower),
      upper_(inst.upper) {
  sense_.reserve(m_);
  rhs_.reserve(m_);
  std::vector<int> count(n_ + 1, 0);
  for (const auto& c : inst.constraints) {
    sense_.push_back(c.sense);
    rhs_.push_back(c.rhs);
    for (int j : c.row.index) ++count[j + 1];
  }
  col_start_.assign(n_ + 1, 0);
  for (int j = 0; j < n_; ++j) col_start_[j + 1] = col_start_[j] + count[j + 1];
  col_row_.resize(col_start_[n_]);
  col_val_.resize(col_start_[n_]);
  std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
  for (int i = 0; i < m_; ++i) {
    const auto& r = inst.constraints[i].row;
    for (std::size_t k = 0; k < r.size(); ++k) {
      const int pos = fill[r.index[k]]++;
      col_row_[pos] = i;
      col_val_[pos] = r.value[k];
    }
  }
}

LpResult LpSolver::solve(const LpOptions& opts) const { return solve(lower_, upper_, opts); }

LpResult LpSolver::solve(std::span<const double> lower, std::span<const double> upper,
                         const LpOptions& opts, const LpBasis* warm) const {
  if (warm && !warm->empty()) {
    Simplex s(n_, m_, col_start_, col_row_, col_val_, opts);
    if (auto r = s.run_warm(cost_, lower, upper, sense_, rhs_, *warm)) return *r;
    // Unusable basis: its pivots stay charged, as they were performed.
  }
  Simplex s(n_, m_, col_start_, col_row_, col_val_, opts);
  return s.run(cost_, lower, upper, sense_, rhs_);
}

LpResult solve_lp(const MilpInstance& inst, int iteration_limit) {
  LpOptions opts;
  opts.iteration_limit = iteration_limit;
  return LpSolver(inst).solve(opts);
}

}  // namespace deskmip
