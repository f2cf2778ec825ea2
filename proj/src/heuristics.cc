// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

// Primal tracking, workload rounding, pump / RENS / rolling horizon and the
// per-family pipelines. Item placement methods live in heuristics_item.cc.

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <stdexcept>

#include "deskmip/heuristics.h"
#include "deskmip/lp.h"
#include "deskmip/rng.h"

namespace deskmip {

void HeuristicBudget::validate() const {
  if (!(wall_seconds > 0) || !(submip_seconds > 0) || max_iterations <= 0)
    throw ModelError("heuristic budget entries must be positive");
}

PrimalTrack::PrimalTrack(const MilpInstance& original, Clock& clock, double horizon,
                         std::optional<double> trivial_bound)
    : inst_(original), clock_(clock), t0_(clock.now()), deadline_(&clock, horizon) {
  tl_.horizon = horizon;
  tl_.initial_primal = trivial_bound;
}

double PrimalTrack::elapsed() const { return clock_.now() - t0_; }

std::optional<double> PrimalTrack::bound() const {
  if (best_) return best_->objective;
  return tl_.initial_primal;
}

bool PrimalTrack::offer(std::span<const double> x) {
  if (static_cast<int>(x.size()) != inst_.num_vars()) return false;
  if (!check_feasibility(inst_, x, 1e-6).feasible) return false;
  const double obj = inst_.evaluate(x);
  if (best_ && !(obj < best_->objective - 1e-9)) return false;
  best_ = Solution(inst_, std::vector<double>(x.begin(), x.end()));
  incumbents_.push_back(*best_);
  tl_.improve_primal(std::clamp(elapsed(), 0.0, tl_.horizon), obj);
  return true;
}

namespace {

LpOptions lp_options(Clock& clock, const Deadline& deadline) {
  LpOptions o;
  o.clock = &clock;
  o.deadline = deadline;
  return o;
}

// LP over the continuous variables with every integer fixed at x.
std::optional<Solution> complete_continuous(const MilpInstance& inst, std::span<const double> x,
                                            Clock& clock, const Deadline& deadline) {
  MilpInstance fixed = inst;
  bool any_continuous = false;
  for (int j = 0; j < inst.num_vars(); ++j) {
    if (inst.is_integer[j]) {
      fixed.lower[j] = fixed.upper[j] = std::round(x[j]);
    } else {
      any_continuous = true;
    }
  }
  if (!any_continuous) {
    std::vector<double> v(fixed.lower);
    if (!check_feasibility(inst, v, 1e-6).feasible) return std::nullopt;
    return Solution(inst, std::move(v));
  }
  const auto lp = LpSolver(relax_all(fixed)).solve(lp_options(clock, deadline));
  if (lp.status != LpStatus::kOptimal) return std::nullopt;
  std::vector<double> v = lp.x;
  for (int j = 0; j < inst.num_vars(); ++j)
    if (inst.is_integer[j]) v[j] = std::round(x[j]);
  return Solution(inst, std::move(v));
}

bool integral(const MilpInstance& inst, std::span<const double> x, double tol = 1e-6) {
  for (int j = 0; j < inst.num_vars(); ++j)
    if (inst.is_integer[j] && integrality_distance(x[j]) > tol) return false;
  return true;
}

void require(const StructuredView& view, Family f) {
  if (view.family != f)
    throw std::invalid_argument(std::string("heuristic expects a ") + to_string(f) +
                                " instance, got " + to_string(view.family));
}

}  // namespace

// ---- Workload ----

TightenedWorkload tighten_workload(const MilpInstance& inst, const StructuredView& view) {
  require(view, Family::kWorkload);
  const auto& d = view.work;
  bool all_small = true;
  for (int i = 0; i < d.tasks; ++i)
    for (int j : d.access[i])
      if (!(d.workload[i] < d.capacity[j])) all_small = false;

  std::vector<int> cap_machine(inst.num_rows(), -1);
  for (int j = 0; j < d.machines; ++j) cap_machine[d.capacity_rows[j]] = j;
  std::vector<bool> define_x(inst.num_rows(), false);
  for (int r : d.define_x_rows) define_x[r] = true;

  TightenedWorkload out;
  out.define_x_eliminated = all_small;
  MilpInstance& t = out.inst;
  t.name = inst.name;
  t.objective = inst.objective;
  t.lower = inst.lower;
  t.upper = inst.upper;
  t.is_integer = inst.is_integer;
  t.var_names = inst.var_names;
  for (int r = 0; r < inst.num_rows(); ++r) {
    if (all_small && define_x[r]) continue;
    const auto& c = inst.constraints[r];
    if (cap_machine[r] >= 0) {
      const int j = cap_machine[r];
      SparseRow row;
      for (std::size_t k = 0; k < c.row.size(); ++k)
        if (c.row.index[k] != d.y(j)) row.add(c.row.index[k], c.row.value[k]);
      row.add(d.y(j), -d.capacity[j]);
      t.add_row(std::move(row), RowSense::kLe, 0.0, inst.row_names[r]);
    } else {
      t.add_row(c.row, c.sense, c.rhs, inst.row_names[r]);
    }
  }
  if (all_small)
    for (int i = 0; i < d.tasks; ++i)
      for (int v : d.x_var[i]) t.upper[v] = std::min(t.upper[v], d.workload[i]);
  return out;
}

Solution round_up(const MilpInstance& inst, const StructuredView& view,
                  std::span<const double> lp_x) {
  require(view, Family::kWorkload);
  std::vector<double> x(lp_x.begin(), lp_x.end());
  for (int j = 0; j < view.work.machines; ++j) x[view.work.y(j)] = lp_x[view.work.y(j)] > 1e-9 ? 1.0 : 0.0;
  return Solution(inst, std::move(x));
}

RoundingResult adaptive_rounding(const MilpInstance& model, const StructuredView& view,
                                 PrimalTrack& track, double gap_epsilon) {
  require(view, Family::kWorkload);
  const auto& d = view.work;
  Clock& clock = track.clock();
  RoundingResult res;
  res.state.gap_epsilon = gap_epsilon;
  const LpSolver solver(relax_all(model));
  const auto lp = solver.solve(lp_options(clock, track.deadline()));
  if (lp.status != LpStatus::kOptimal) {
    if (lp.status == LpStatus::kIterationLimit) return res;
    throw ModelError("LP relaxation of the workload model is not solvable");
  }
  res.lp_x = lp.x;
  if (integral(model, lp.x)) {
    std::vector<double> x = lp.x;
    for (int j = 0; j < d.machines; ++j) x[d.y(j)] = std::round(x[d.y(j)]);
    track.offer(x);
    res.best = Solution(model, std::move(x));
    res.state.primal_bound = res.state.dual_bound = res.best->objective;
    return res;
  }
  std::vector<int> order(d.machines);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return lp.x[d.y(a)] > lp.x[d.y(b)]; });
  double pb = track.bound().value_or(d.machines);
  double db = std::ceil(lp.objective - 1e-6);
  while (pb - db > gap_epsilon && !track.deadline().expired()) {
    const int v = static_cast<int>(std::floor((pb + db) / 2.0));
    if (v < db || v >= pb) break;
    res.state.target = v;
    res.state.threshold = v > 0 ? lp.x[d.y(order[v - 1])] : 1.0;
    std::vector<double> lo = model.lower, hi = model.upper;
    for (int r = 0; r < d.machines; ++r) {
      const double open = r < v ? 1.0 : 0.0;
      lo[d.y(order[r])] = hi[d.y(order[r])] = open;
    }
    const auto fixed = solver.solve(lo, hi, lp_options(clock, track.deadline()));
    ++res.iterations;
    if (fixed.status == LpStatus::kIterationLimit) break;
    if (fixed.status == LpStatus::kOptimal) {
      std::vector<double> x = fixed.x;
      for (int j = 0; j < d.machines; ++j) x[d.y(j)] = std::round(x[d.y(j)]);
      track.offer(x);
      if (!res.best || model.evaluate(x) < res.best->objective) res.best = Solution(model, x);
      pb = v;
    } else {
      db = v + 1;
    }
  }
  res.state.primal_bound = pb;
  res.state.dual_bound = db;
  return res;
}

std::optional<Solution> rins(const MilpInstance& inst, const Solution& incumbent,
                             std::span<const double> lp_sol, double budget, Clock& clock,
                             double tol) {
  std::map<int, double> fix;
  for (int j = 0; j < inst.num_vars(); ++j)
    if (inst.is_integer[j] && std::abs(incumbent.values[j] - lp_sol[j]) <= tol)
      fix[j] = std::round(incumbent.values[j]);
  const auto sub = solve_submip(inst, fix, {}, {}, budget, &clock, incumbent);
  if (sub && sub->objective < incumbent.objective - 1e-9) return sub;
  return std::nullopt;
}

// ---- Time-indexed ----

PumpResult feasibility_pump(const MilpInstance& inst, Clock& clock, const Deadline& deadline,
                            int iteration_cap, std::uint64_t seed) {
  PumpResult res;
  const MilpInstance relaxed = relax_all(inst);
  const auto lp = LpSolver(relaxed).solve(lp_options(clock, deadline));
  if (lp.status != LpStatus::kOptimal) return res;
  const int n = inst.num_vars();
  const auto ints = inst.integer_vars();
  std::vector<double> xstar = lp.x;
  std::deque<std::vector<double>> history;
  Rng rng(seed);
  for (int it = 0; it < iteration_cap && !deadline.expired(); ++it) {
    res.iterations = it;
    if (integral(inst, xstar)) {
      if (auto s = complete_continuous(inst, xstar, clock, deadline)) {
        res.solution = s;
        return res;
      }
    }
    std::vector<double> xr(n, 0.0);
    for (int j : ints) xr[j] = std::clamp(std::round(xstar[j]), inst.lower[j], inst.upper[j]);
    if (std::find(history.begin(), history.end(), xr) != history.end() && !ints.empty()) {
      // Cycle: perturb a random subset of 1..10 integer variables.
      const int t = std::min<int>(10, static_cast<int>(ints.size()));
      const int count = static_cast<int>(rng.uniform_int(1, t));
      std::vector<int> pick = ints;
      rng.shuffle(pick);
      for (int k = 0; k < count; ++k) {
        const int j = pick[k];
        double step = rng.bernoulli(0.5) ? 1.0 : -1.0;
        if (xr[j] <= inst.lower[j]) step = 1.0;
        if (xr[j] >= inst.upper[j]) step = -1.0;
        const double nv = xr[j] + step;
        if (nv >= inst.lower[j] && nv <= inst.upper[j]) xr[j] = nv;
      }
    }
    history.push_back(xr);
    if (history.size() > 3) history.pop_front();
    if (auto s = complete_continuous(inst, xr, clock, deadline)) {
      res.solution = s;
      res.iterations = it + 1;
      return res;
    }
    // Distance LP: minimize the L1 distance to xr over the relaxation.
    MilpInstance dist = relaxed;
    std::fill(dist.objective.begin(), dist.objective.end(), 0.0);
    for (int j : ints) {
      if (xr[j] <= inst.lower[j]) {
        dist.objective[j] = 1.0;
      } else if (xr[j] >= inst.upper[j]) {
        dist.objective[j] = -1.0;
      } else {
        const int aux = dist.add_var(0, kInf, 1.0, false);
        SparseRow above, below;
        above.add(j, 1.0);
        above.add(aux, -1.0);
        below.add(j, 1.0);
        below.add(aux, 1.0);
        dist.add_row(std::move(above), RowSense::kLe, xr[j]);
        dist.add_row(std::move(below), RowSense::kGe, xr[j]);
      }
    }
    const auto dl = LpSolver(dist).solve(lp_options(clock, deadline));
    if (dl.status != LpStatus::kOptimal) break;
    xstar.assign(dl.x.begin(), dl.x.begin() + n);
  }
  res.iterations = std::min(res.iterations + 1, iteration_cap);
  return res;
}

std::optional<Solution> rens(const MilpInstance& inst, std::span<const int> period, int horizon,
                             const Solution& guide, double budget, Clock& clock) {
  std::map<int, double> fix;
  for (int j = 0; j < inst.num_vars(); ++j)
    if (inst.is_integer[j] && period[j] >= 1 && period[j] < 0.9 * horizon)
      fix[j] = std::round(guide.values[j]);
  const auto sub = solve_submip(inst, fix, {}, {}, budget, &clock, guide);
  if (sub && sub->objective < guide.objective - 1e-9) return sub;
  return std::nullopt;
}

HorizonSchedule HorizonSchedule::initial(int horizon, int divisor) {
  if (horizon < 1 || divisor < 1) throw std::invalid_argument("horizon and divisor must be >= 1");
  HorizonSchedule s;
  s.horizon = horizon;
  s.delta = (horizon + divisor - 1) / divisor;
  s.fix = std::min(s.delta, horizon);
  s.relax = std::min(s.fix + s.delta, horizon);
  s.ignore = std::min(s.fix + 2 * s.delta, horizon);
  return s;
}

bool HorizonSchedule::advance() {
  if (done()) return false;
  fix = std::min(fix + delta, horizon);
  relax = std::min(fix + delta, horizon);
  ignore = std::min(fix + 2 * delta, horizon);
  return true;
}

RollingResult rolling_horizon(const MilpInstance& inst, std::span<const int> period,
                              HorizonSchedule schedule, const Solution& warm,
                              const HeuristicBudget& budget, PrimalTrack& track) {
  Clock& clock = track.clock();
  RollingResult res;
  res.best = warm;
  Solution prev = warm;
  const int n = inst.num_vars();
  do {
    if (track.deadline().expired()) break;
    std::optional<Solution> sub;
    int relax_end = schedule.relax;
    for (int attempt = 0; attempt < 2 && !sub; ++attempt) {
      // The retry doubles delta for this iteration only.
      relax_end = attempt == 0 ? schedule.relax
                               : std::min(schedule.fix + 2 * schedule.delta, schedule.horizon);
      const int ignore_end = attempt == 0
                                 ? schedule.ignore
                                 : std::min(schedule.fix + 4 * schedule.delta, schedule.horizon);
      std::map<int, double> fix;
      std::set<int> relax;
      for (int j = 0; j < n; ++j) {
        if (!inst.is_integer[j]) continue;
        if (period[j] < schedule.fix)
          fix[j] = std::round(prev.values[j]);
        else if (period[j] > relax_end)
          relax.insert(j);
      }
      std::set<int> dropped;
      for (int r = 0; r < inst.num_rows(); ++r)
        for (int j : inst.constraints[r].row.index)
          if (inst.is_integer[j] && period[j] > ignore_end) {
            dropped.insert(r);
            break;
          }
      const double b = std::min(budget.submip_seconds, track.deadline().remaining());
      if (b <= 0) break;
      sub = solve_submip(inst, fix, relax, dropped, b, &clock, prev);
    }
    if (!sub) break;
    ++res.iterations;
    res.fix_frontiers.push_back(schedule.fix);
    std::vector<double> merged = prev.values;
    for (int j = 0; j < n; ++j)
      if (inst.is_integer[j] && period[j] <= relax_end) merged[j] = std::round(sub->values[j]);
    if (auto full = complete_continuous(inst, merged, clock, track.deadline())) {
      track.offer(full->values);
      if (full->objective < res.best->objective - 1e-9) res.best = full;
      prev = *full;
    }
  } while (schedule.advance());
  return res;
}

// ---- Pipelines ----

namespace {

void item_pipeline(const MilpInstance& inst, const StructuredView& view,
                   const HeuristicBudget& budget, PrimalTrack& track) {
  Clock& clock = track.clock();
  const auto& d = view.item;
  const auto big = detect_big_items(view);
  std::optional<Solution> g;
  if (static_cast<int>(big.size()) <= d.containers)
    g = greedy_construct(inst, view, preplace_big_items(view, big), &clock);
  if (!g) g = greedy_construct(inst, view, {}, &clock);
  if (!g) return;
  track.offer(g->values);
  track.offer(swap_improve(inst, view, *g, clock, track.deadline(), budget.max_iterations).values);
  if (track.deadline().expired()) return;
  if (static_cast<int>(big.size()) <= d.containers / 2) {
    const Solution a = assignment_construct(inst, view, budget, clock);
    track.offer(a.values);
    track.offer(swap_improve(inst, view, a, clock, track.deadline(), budget.max_iterations).values);
  }
  const int F = d.containers / 2;
  bool improved = true;
  while (improved && !track.deadline().expired()) {
    improved = false;
    for (int p = F; p < d.containers && !improved; ++p)
      for (int q = p + 1; q < d.containers && !improved; ++q) {
        if (track.deadline().expired()) return;
        const Solution cur = *track.best();
        const Solution r = two_container_reassign(inst, view, cur, budget, clock, std::pair{p, q});
        if (track.offer(r.values)) improved = true;
      }
  }
}

void workload_pipeline(const MilpInstance& inst, const StructuredView& view,
                       const HeuristicBudget& budget, const HeuristicParams& params,
                       PrimalTrack& track) {
  Clock& clock = track.clock();
  const auto lp = LpSolver(relax_all(inst)).solve(lp_options(clock, track.deadline()));
  if (lp.status == LpStatus::kOptimal) track.offer(round_up(inst, view, lp.x).values);
  const auto tight = tighten_workload(inst, view);
  const auto rr = adaptive_rounding(tight.inst, view, track, params.rounding_gap_epsilon);
  if (rr.lp_x.empty()) return;
  for (int it = 0; it < budget.max_iterations && track.best() && !track.deadline().expired();
       ++it) {
    const double b = std::min(budget.submip_seconds, track.deadline().remaining());
    const auto r = rins(tight.inst, *track.best(), rr.lp_x, b, clock,
                        params.rins_fixing_tolerance);
    if (!r || !track.offer(r->values)) break;
  }
}

void time_pipeline(const MilpInstance& inst, const StructuredView& view,
                   const HeuristicBudget& budget, const HeuristicParams& params,
                   PrimalTrack& track) {
  Clock& clock = track.clock();
  std::vector<int> period = view.time.period;
  int horizon = view.time.horizon;
  if (static_cast<int>(period.size()) != inst.num_vars() || horizon < 1) {
    const auto rec = recover_periods(inst);
    period = rec.period;
    horizon = std::max(1, rec.num_periods);
  }
  const auto fp = feasibility_pump(inst, clock, track.deadline(), params.fp_iteration_cap,
                                   params.seed);
  if (fp.solution) track.offer(fp.solution->values);
  if (!track.best() && static_cast<int>(view.trivial_solution.size()) == inst.num_vars())
    track.offer(view.trivial_solution);
  if (!track.best() || track.deadline().expired()) return;
  const double b = std::min(budget.submip_seconds, track.deadline().remaining());
  if (const auto r = rens(inst, period, horizon, *track.best(), b, clock)) track.offer(r->values);
  if (track.deadline().expired()) return;
  rolling_horizon(inst, period, HorizonSchedule::initial(horizon, params.rh_delta_divisor),
                  *track.best(), budget, track);
}

void generic_pipeline(const MilpInstance& inst, const HeuristicBudget& budget,
                      const HeuristicParams& params, PrimalTrack& track) {
  Clock& clock = track.clock();
  const auto fp = feasibility_pump(inst, clock, track.deadline(), params.fp_iteration_cap,
                                   params.seed);
  if (fp.solution) track.offer(fp.solution->values);
  if (!track.best()) return;
  const auto lp = LpSolver(relax_all(inst)).solve(lp_options(clock, track.deadline()));
  if (lp.status != LpStatus::kOptimal) return;
  for (int it = 0; it < budget.max_iterations && !track.deadline().expired(); ++it) {
    const double b = std::min(budget.submip_seconds, track.deadline().remaining());
    const auto r = rins(inst, *track.best(), lp.x, b, clock, params.rins_fixing_tolerance);
    if (!r || !track.offer(r->values)) break;
  }
}

}  // namespace

PipelineResult primal_pipeline(const MilpInstance& inst, const StructuredView& view,
                               const HeuristicBudget& budget, Clock& clock,
                               const HeuristicParams& params) {
  budget.validate();
  std::optional<double> trivial;
  if (view.family != Family::kUnknown) trivial = view.trivial_bound;
  PrimalTrack track(inst, clock, budget.wall_seconds, trivial);
  switch (view.family) {
    case Family::kItemPlacement:
      item_pipeline(inst, view, budget, track);
      break;
    case Family::kWorkload:
      workload_pipeline(inst, view, budget, params, track);
      break;
    case Family::kTimeIndexed:
      time_pipeline(inst, view, budget, params, track);
      break;
    case Family::kUnknown:
      generic_pipeline(inst, budget, params, track);
      break;
  }
  return {track.timeline(), track.best(), track.incumbents()};
}

PrimalHeuristic make_tree_heuristic(const StructuredView* view, const HeuristicParams& params,
                                    double submip_seconds) {
  return [view, params, submip_seconds](const HeuristicCall& call)
             -> std::optional<std::vector<double>> {
    const MilpInstance& inst = *call.inst;
    Clock& clock = *call.clock;
    const double budget = std::min(submip_seconds, call.deadline.remaining());
    if (!(budget > 0)) return std::nullopt;
    if (call.incumbent && call.nodes_processed > 1) {
      const auto r = rins(inst, *call.incumbent, call.node.x, budget, clock,
                          params.rins_fixing_tolerance);
      if (r) return r->values;
      return std::nullopt;
    }
    if (call.nodes_processed > 1) return std::nullopt;
    const Family fam = view ? view->family : Family::kUnknown;
    PrimalTrack track(inst, clock, budget, std::nullopt);
    if (fam == Family::kItemPlacement) {
      const auto big = detect_big_items(*view);
      std::optional<Solution> g;
      if (static_cast<int>(big.size()) <= view->item.containers)
        g = greedy_construct(inst, *view, preplace_big_items(*view, big), &clock);
      if (!g) g = greedy_construct(inst, *view, {}, &clock);
      if (g) track.offer(swap_improve(inst, *view, *g, clock, track.deadline()).values);
    } else if (fam == Family::kWorkload) {
      adaptive_rounding(inst, *view, track, params.rounding_gap_epsilon);
    } else if (fam == Family::kTimeIndexed) {
      HeuristicBudget hb;
      hb.wall_seconds = budget;
      hb.submip_seconds = budget / 4;
      time_pipeline(inst, *view, hb, params, track);
    } else {
      const auto fp = feasibility_pump(inst, clock, track.deadline(), params.fp_iteration_cap,
                                       params.seed);
      if (fp.solution) track.offer(fp.solution->values);
    }
    if (track.best()) return track.best()->values;
    return std::nullopt;
  };
}

}  // namespace deskmip
