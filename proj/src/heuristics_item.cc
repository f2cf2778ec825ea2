// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

// Item placement: big-item preplacement, greedy construction, exchange local
// search and the two sub-MIP based methods.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "deskmip/heuristics.h"

namespace deskmip {

namespace {

void require_item_placement(const StructuredView& view) {
  if (view.family != Family::kItemPlacement)
    throw std::invalid_argument("item placement heuristic on a " +
                                std::string(to_string(view.family)) + " instance");
}

// Container loads of a (partial) assignment.
class Placement {
 public:
  explicit Placement(const ItemPlacementData& d)
      : d_(d), where_(d.items, -1), load_(d.containers * d.dims, 0.0),
        fill_(d.containers * d.dims, 0.0) {}

  int where(int i) const { return where_[i]; }
  const std::vector<int>& assignment() const { return where_; }

  bool fits(int i, int j) const {
    for (int k = 0; k < d_.dims; ++k)
      if (load_[j * d_.dims + k] + d_.a(i, k) > d_.capacity[k] + 1e-9) return false;
    return true;
  }

  void place(int i, int j) {
    where_[i] = j;
    for (int k = 0; k < d_.dims; ++k) {
      load_[j * d_.dims + k] += d_.a(i, k);
      fill_[j * d_.dims + k] += d_.d(i, k);
    }
  }

  void remove(int i) {
    const int j = where_[i];
    for (int k = 0; k < d_.dims; ++k) {
      load_[j * d_.dims + k] -= d_.a(i, k);
      fill_[j * d_.dims + k] -= d_.d(i, k);
    }
    where_[i] = -1;
  }

  bool within_capacity(int j) const {
    for (int k = 0; k < d_.dims; ++k)
      if (load_[j * d_.dims + k] > d_.capacity[k] + 1e-9) return false;
    return true;
  }

  double y(int j, int k) const { return std::max(0.0, 1.0 - fill_[j * d_.dims + k]); }

  double objective() const {
    double obj = 0.0;
    for (int k = 0; k < d_.dims; ++k) {
      double z = 0.0;
      for (int j = 0; j < d_.containers; ++j) {
        const double v = y(j, k);
        obj += d_.alpha[k] * v;
        z = std::max(z, v);
      }
      obj += d_.beta[k] * z;
    }
    return obj;
  }

  double unevenness(int j) const {
    double s = 0.0;
    for (int k = 0; k < d_.dims; ++k) s += d_.alpha[k] * y(j, k);
    return s;
  }

 private:
  const ItemPlacementData& d_;
  std::vector<int> where_;
  std::vector<double> load_;
  std::vector<double> fill_;
};

// Builds the full variable vector with y and z at their smallest values.
Solution to_solution(const MilpInstance& inst, const ItemPlacementData& d,
                     std::span<const int> where) {
  std::vector<double> x(inst.num_vars(), 0.0);
  for (int i = 0; i < d.items; ++i) x[d.x(i, where[i])] = 1.0;
  for (int k = 0; k < d.dims; ++k) {
    double z = 0.0;
    for (int j = 0; j < d.containers; ++j) {
      double fill = 0.0;
      for (int i = 0; i < d.items; ++i)
        if (where[i] == j) fill += d.d(i, k);
      const double y = std::max(0.0, 1.0 - fill);
      x[d.y(j, k)] = y;
      z = std::max(z, y);
    }
    x[d.z(k)] = z;
  }
  return Solution(inst, std::move(x));
}

std::vector<int> assignment_of(const ItemPlacementData& d, const Solution& sol) {
  std::vector<int> where(d.items, -1);
  for (int i = 0; i < d.items; ++i)
    for (int j = 0; j < d.containers; ++j)
      if (sol.values[d.x(i, j)] > 0.5) where[i] = j;
  for (int w : where)
    if (w < 0) throw std::invalid_argument("solution leaves an item unassigned");
  return where;
}

void charge_moves(Clock* clock, long count) {
  if (clock) clock->charge(clock->costs().move_eval_seconds * static_cast<double>(count));
}

}  // namespace

double item_placement_objective(const StructuredView& view, std::span<const int> container_of) {
  const auto& d = view.item;
  double obj = 0.0;
  for (int k = 0; k < d.dims; ++k) {
    double z = 0.0;
    for (int j = 0; j < d.containers; ++j) {
      double fill = 0.0;
      for (int i = 0; i < d.items; ++i)
        if (container_of[i] == j) fill += d.d(i, k);
      const double y = std::max(0.0, 1.0 - fill);
      obj += d.alpha[k] * y;
      z = std::max(z, y);
    }
    obj += d.beta[k] * z;
  }
  return obj;
}

std::vector<int> detect_big_items(const StructuredView& view) {
  require_item_placement(view);
  const auto& d = view.item;
  std::vector<std::pair<double, int>> big;
  for (int i = 0; i < d.items; ++i) {
    double ratio = 0.0;
    bool is_big = false;
    for (int k = 0; k < d.dims; ++k) {
      ratio = std::max(ratio, d.a(i, k) / d.capacity[k]);
      if (d.a(i, k) > d.capacity[k] / 2.0) is_big = true;
    }
    if (is_big) big.emplace_back(ratio, i);
  }
  std::stable_sort(big.begin(), big.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<int> out;
  for (const auto& [r, i] : big) out.push_back(i);
  return out;
}

std::map<int, double> preplace_big_items(const StructuredView& view, const std::vector<int>& big) {
  require_item_placement(view);
  const auto& d = view.item;
  if (static_cast<int>(big.size()) > d.containers)
    throw std::invalid_argument("more big items than containers");
  std::map<int, double> fix;
  for (std::size_t r = 0; r < big.size(); ++r)
    for (int j = 0; j < d.containers; ++j)
      fix[d.x(big[r], j)] = j == static_cast<int>(r) ? 1.0 : 0.0;
  return fix;
}

std::optional<Solution> greedy_construct(const MilpInstance& inst, const StructuredView& view,
                                         const std::map<int, double>& fixings, Clock* clock) {
  require_item_placement(view);
  const auto& d = view.item;
  const int I = d.items, J = d.containers;
  std::vector<int> pre(I, -1);
  std::vector<std::vector<bool>> forbid(I, std::vector<bool>(J, false));
  for (const auto& [var, val] : fixings) {
    if (var < 0 || var >= I * J) continue;
    const int i = var / J, j = var % J;
    if (val > 0.5)
      pre[i] = j;
    else
      forbid[i][j] = true;
  }
  Placement pl(d);
  for (int i = 0; i < I; ++i) {
    if (pre[i] < 0) continue;
    if (!pl.fits(i, pre[i])) return std::nullopt;
    pl.place(i, pre[i]);
  }
  std::vector<int> order;
  std::vector<double> key(I, 0.0);
  for (int i = 0; i < I; ++i) {
    if (pre[i] >= 0) continue;
    order.push_back(i);
    for (int k = 0; k < d.dims; ++k) key[i] += d.a(i, k) / d.capacity[k];
  }
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key[a] > key[b]; });
  long evals = 0;
  for (int i : order) {
    int best = -1;
    double best_obj = kInf;
    for (int j = 0; j < J; ++j) {
      if (forbid[i][j] || !pl.fits(i, j)) continue;
      pl.place(i, j);
      const double obj = pl.objective();
      pl.remove(i);
      ++evals;
      if (obj < best_obj - 1e-12) {
        best_obj = obj;
        best = j;
      }
    }
    if (best < 0) {
      charge_moves(clock, evals);
      return std::nullopt;
    }
    pl.place(i, best);
  }
  charge_moves(clock, evals);
  return to_solution(inst, d, pl.assignment());
}

Solution swap_improve(const MilpInstance& inst, const StructuredView& view, const Solution& sol,
                      Clock& clock, const Deadline& deadline, int max_iterations) {
  require_item_placement(view);
  if (!check_feasibility(inst, sol.values, 1e-6).feasible)
    throw std::invalid_argument("swap_improve needs a feasible solution");
  const auto& d = view.item;
  const int J = d.containers;
  Placement pl(d);
  const auto start = assignment_of(d, sol);
  for (int i = 0; i < d.items; ++i) pl.place(i, start[i]);
  double current = pl.objective();
  long evals = 0;
  int accepted = 0;

  // Applies a move, keeps it if feasible and strictly better.
  auto attempt = [&](std::initializer_list<std::pair<int, int>> moves, int p, int q) {
    ++evals;
    std::vector<std::pair<int, int>> undo;
    for (const auto& [i, to] : moves) {
      undo.emplace_back(i, pl.where(i));
      pl.remove(i);
      pl.place(i, to);
    }
    if (pl.within_capacity(p) && pl.within_capacity(q)) {
      const double obj = pl.objective();
      if (obj < current - 1e-9) {
        current = obj;
        return true;
      }
    }
    for (auto it = undo.rbegin(); it != undo.rend(); ++it) {
      pl.remove(it->first);
      pl.place(it->first, it->second);
    }
    return false;
  };

  auto items_in = [&](int j) {
    std::vector<int> out;
    for (int i = 0; i < d.items; ++i)
      if (pl.where(i) == j) out.push_back(i);
    return out;
  };

  bool improved = true;
  while (improved && accepted < max_iterations && !deadline.expired()) {
    improved = false;
    for (int p = 0; p < J && !improved; ++p) {
      for (int q = p + 1; q < J && !improved; ++q) {
        if (deadline.expired()) break;
        const auto P = items_in(p);
        const auto Q = items_in(q);
        for (int a : P) {
          for (int b : Q)
            if (attempt({{a, q}, {b, p}}, p, q)) {
              improved = true;
              break;
            }
          if (improved) break;
        }
        for (std::size_t s = 0; s < P.size() && !improved; ++s)
          for (std::size_t t = s + 1; t < P.size() && !improved; ++t)
            for (int b : Q)
              if (attempt({{P[s], q}, {P[t], q}, {b, p}}, p, q)) {
                improved = true;
                break;
              }
        for (std::size_t s = 0; s < Q.size() && !improved; ++s)
          for (std::size_t t = s + 1; t < Q.size() && !improved; ++t)
            for (int a : P)
              if (attempt({{Q[s], p}, {Q[t], p}, {a, q}}, p, q)) {
                improved = true;
                break;
              }
      }
    }
    charge_moves(&clock, evals);
    evals = 0;
    if (improved) ++accepted;
  }
  const Solution out = to_solution(inst, d, pl.assignment());
  return out.objective < sol.objective ? out : sol;
}

namespace {

// Restricted model for the first F containers. Items may instead go to an
// aggregate remainder, which carries the capacity and demand of the other
// containers. Variables: x(i,j) j < F, u_i, y(j,k) j < F, z_k, Y_k.
struct FirstHalfModel {
  MilpInstance inst;
  int F = 0;
  int x(int i, int j) const { return i * F + j; }
  int u(int i) const { return items * F + i; }
  int y(int j, int k) const { return items * F + items + j * dims + k; }
  int z(int k) const { return items * F + items + F * dims + k; }
  int agg(int k) const { return items * F + items + F * dims + dims + k; }
  int items = 0;
  int dims = 0;
};

FirstHalfModel first_half_model(const ItemPlacementData& d, int F,
                                const std::map<int, double>& preplaced) {
  FirstHalfModel m;
  m.F = F;
  m.items = d.items;
  m.dims = d.dims;
  const int I = d.items, K = d.dims, rest = d.containers - F;
  auto& inst = m.inst;
  inst.name = "first_half";
  for (int i = 0; i < I; ++i)
    for (int j = 0; j < F; ++j) inst.add_var(0, 1, 0, true);
  for (int i = 0; i < I; ++i) inst.add_var(0, 1, 0, false);
  for (int j = 0; j < F; ++j)
    for (int k = 0; k < K; ++k) inst.add_var(0, kInf, d.alpha[k], false);
  for (int k = 0; k < K; ++k) inst.add_var(0, kInf, d.beta[k], false);
  for (int k = 0; k < K; ++k) inst.add_var(0, kInf, d.alpha[k], false);
  for (const auto& [var, val] : preplaced) {
    const int i = var / d.containers, j = var % d.containers;
    if (j < F) inst.lower[m.x(i, j)] = inst.upper[m.x(i, j)] = val;
  }
  for (int i = 0; i < I; ++i) {
    SparseRow r;
    for (int j = 0; j < F; ++j) r.add(m.x(i, j), 1.0);
    r.add(m.u(i), 1.0);
    inst.add_row(std::move(r), RowSense::kEq, 1.0);
  }
  for (int j = 0; j < F; ++j)
    for (int k = 0; k < K; ++k) {
      SparseRow cap, dy, dz;
      for (int i = 0; i < I; ++i) {
        cap.add(m.x(i, j), d.a(i, k));
        if (d.d(i, k) != 0.0) dy.add(m.x(i, j), d.d(i, k));
      }
      dy.add(m.y(j, k), 1.0);
      dz.add(m.y(j, k), 1.0);
      dz.add(m.z(k), -1.0);
      inst.add_row(std::move(cap), RowSense::kLe, d.capacity[k]);
      inst.add_row(std::move(dy), RowSense::kGe, 1.0);
      inst.add_row(std::move(dz), RowSense::kLe, 0.0);
    }
  for (int k = 0; k < K; ++k) {
    SparseRow cap, dem, link;
    for (int i = 0; i < I; ++i) {
      cap.add(m.u(i), d.a(i, k));
      if (d.d(i, k) != 0.0) dem.add(m.u(i), d.d(i, k));
    }
    dem.add(m.agg(k), 1.0);
    link.add(m.agg(k), 1.0);
    link.add(m.z(k), -static_cast<double>(rest));
    inst.add_row(std::move(cap), RowSense::kLe, rest * d.capacity[k]);
    inst.add_row(std::move(dem), RowSense::kGe, static_cast<double>(rest));
    inst.add_row(std::move(link), RowSense::kLe, 0.0);
  }
  return m;
}

std::vector<double> first_half_point(const FirstHalfModel& m, const ItemPlacementData& d,
                                     std::span<const int> where) {
  std::vector<double> x(m.inst.num_vars(), 0.0);
  const int K = d.dims, rest = d.containers - m.F;
  std::vector<double> rest_fill(K, 0.0);
  for (int i = 0; i < d.items; ++i) {
    if (where[i] < m.F) {
      x[m.x(i, where[i])] = 1.0;
    } else {
      x[m.u(i)] = 1.0;
      for (int k = 0; k < K; ++k) rest_fill[k] += d.d(i, k);
    }
  }
  for (int k = 0; k < K; ++k) {
    double z = 0.0;
    for (int j = 0; j < m.F; ++j) {
      double fill = 0.0;
      for (int i = 0; i < d.items; ++i)
        if (where[i] == j) fill += d.d(i, k);
      x[m.y(j, k)] = std::max(0.0, 1.0 - fill);
      z = std::max(z, x[m.y(j, k)]);
    }
    x[m.agg(k)] = std::max(0.0, rest - rest_fill[k]);
    x[m.z(k)] = std::max(z, x[m.agg(k)] / rest);
  }
  return x;
}

}  // namespace

Solution assignment_construct(const MilpInstance& inst, const StructuredView& view,
                              const HeuristicBudget& budget, Clock& clock) {
  require_item_placement(view);
  const auto& d = view.item;
  const int I = d.items, J = d.containers;
  const int F = J / 2;
  const auto big = detect_big_items(view);
  if (static_cast<int>(big.size()) > F)
    throw std::invalid_argument("assignment_construct needs at least twice as many containers as big items");
  const auto pre = preplace_big_items(view, big);
  auto greedy = greedy_construct(inst, view, pre, &clock);
  if (!greedy) greedy = greedy_construct(inst, view, {}, &clock);
  if (!greedy) throw std::runtime_error("greedy construction failed");
  if (static_cast<int>(big.size()) == I) return *greedy;

  // Step (i): which items go to the first F containers.
  const auto greedy_where = assignment_of(d, *greedy);
  const FirstHalfModel m = first_half_model(d, F, pre);
  std::optional<Solution> warm;
  {
    auto w = first_half_point(m, d, greedy_where);
    if (check_feasibility(m.inst, w, 1e-6).feasible) warm = Solution(m.inst, std::move(w));
  }
  BnbConfig cfg;
  cfg.node_selection = NodeSelection::kHybrid;
  cfg.time_limit = budget.submip_seconds;
  cfg.root_counts_toward_limit = true;
  const BnbResult step1 = solve(m.inst, cfg, warm, &clock);
  if (!step1.best) return *greedy;

  // Step (ii): the rest, with step-(i) placements fixed.
  std::map<int, double> fix;
  for (int i = 0; i < I; ++i) {
    int in_first = -1;
    for (int j = 0; j < F; ++j)
      if (step1.best->values[m.x(i, j)] > 0.5) in_first = j;
    for (int j = 0; j < J; ++j) {
      if (in_first >= 0)
        fix[d.x(i, j)] = j == in_first ? 1.0 : 0.0;
      else if (j < F)
        fix[d.x(i, j)] = 0.0;
    }
  }
  const auto completion = greedy_construct(inst, view, fix, &clock);
  const auto sub = solve_submip(inst, fix, {}, {}, budget.submip_seconds, &clock, completion);
  std::optional<Solution> out = sub ? sub : completion;
  if (!out) return *greedy;
  // Normalize y and z to their smallest values for the found assignment. The
  // restricted first step only approximates the rest, so keep the greedy
  // point when it is better.
  Solution built = to_solution(inst, d, assignment_of(d, *out));
  return built.objective <= greedy->objective ? built : *greedy;
}

Solution two_container_reassign(const MilpInstance& inst, const StructuredView& view,
                                const Solution& sol, const HeuristicBudget& budget, Clock& clock,
                                std::optional<std::pair<int, int>> pair) {
  require_item_placement(view);
  if (!check_feasibility(inst, sol.values, 1e-6).feasible)
    throw std::invalid_argument("two_container_reassign needs a feasible solution");
  const auto& d = view.item;
  const int J = d.containers, F = J / 2;
  const auto where = assignment_of(d, sol);
  if (!pair) {
    Placement pl(d);
    for (int i = 0; i < d.items; ++i) pl.place(i, where[i]);
    std::vector<int> last(J - F);
    std::iota(last.begin(), last.end(), F);
    std::stable_sort(last.begin(), last.end(),
                     [&](int a, int b) { return pl.unevenness(a) > pl.unevenness(b); });
    if (last.size() < 2) return sol;
    pair = std::make_pair(std::min(last[0], last[1]), std::max(last[0], last[1]));
  }
  const auto [p, q] = *pair;
  std::map<int, double> fix;
  for (int i = 0; i < d.items; ++i) {
    const bool movable = where[i] == p || where[i] == q;
    for (int j = 0; j < J; ++j) {
      if (movable && (j == p || j == q)) continue;
      fix[d.x(i, j)] = (!movable && j == where[i]) ? 1.0 : 0.0;
    }
  }
  const auto sub = solve_submip(inst, fix, {}, {}, budget.submip_seconds, &clock, sol);
  if (!sub) return sol;
  const Solution out = to_solution(inst, d, assignment_of(d, *sub));
  return out.objective < sol.objective - 1e-9 ? out : sol;
}

}  // namespace deskmip
