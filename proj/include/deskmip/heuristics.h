// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

// Primal heuristics for the three families and the per-family pipelines that
// chain them. Work is charged to the caller's clock; sub-MIPs run on the same
// clock, so a pipeline's timeline reflects everything it did.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "deskmip/bnb.h"
#include "deskmip/clock.h"
#include "deskmip/generators.h"
#include "deskmip/metrics.h"
#include "deskmip/model.h"
#include "deskmip/view.h"

namespace deskmip {

struct HeuristicBudget {
  double wall_seconds = 10.0;   // total, on the caller's clock
  double submip_seconds = 2.0;  // per sub-MIP
  int max_iterations = 1000;    // per local loop
  void validate() const;  // throws ModelError unless all positive
};

struct HeuristicParams {
  int fp_iteration_cap = 200;
  double rins_fixing_tolerance = 1e-6;
  double rounding_gap_epsilon = 0.0;
  int rh_delta_divisor = 5;
  std::uint64_t seed = 0;
};

// Records strictly improving points that are feasible for the original
// instance at 1e-6 as primal events.
class PrimalTrack {
 public:
  PrimalTrack(const MilpInstance& original, Clock& clock, double horizon,
              std::optional<double> trivial_bound);

  bool offer(std::span<const double> x);
  const std::optional<Solution>& best() const { return best_; }
  // Every accepted point, in acceptance order.
  const std::vector<Solution>& incumbents() const { return incumbents_; }
  std::optional<double> bound() const;
  const BoundsTimeline& timeline() const { return tl_; }
  Clock& clock() const { return clock_; }
  const Deadline& deadline() const { return deadline_; }
  double elapsed() const;

 private:
  const MilpInstance& inst_;
  Clock& clock_;
  double t0_;
  Deadline deadline_;
  BoundsTimeline tl_;
  std::optional<Solution> best_;
  std::vector<Solution> incumbents_;
};

// ---- Item placement ----

// Items with a(i,k) > b_k / 2 for some k, by decreasing max_k a(i,k) / b_k.
std::vector<int> detect_big_items(const StructuredView& view);
// Big item of rank r goes to container r; fixes the whole x row of the item.
std::map<int, double> preplace_big_items(const StructuredView& view, const std::vector<int>& big);
// Items by decreasing sum_k a(i,k) / b_k, each to the capacity-feasible
// container with the smallest objective increase. Empty when some item fits
// nowhere.
std::optional<Solution> greedy_construct(const MilpInstance& inst, const StructuredView& view,
                                         const std::map<int, double>& fixings,
                                         Clock* clock = nullptr);
// First-improvement 1-1 and 2-1 exchanges between container pairs.
Solution swap_improve(const MilpInstance& inst, const StructuredView& view, const Solution& sol,
                      Clock& clock, const Deadline& deadline, int max_iterations = 1000);
// Restricted model over the first half of the containers, then a sub-MIP
// over the rest. Falls back to the greedy point.
Solution assignment_construct(const MilpInstance& inst, const StructuredView& view,
                              const HeuristicBudget& budget, Clock& clock);
// Reoptimizes the items of two containers from the second half. With no pair
// given, the two with the largest sum_k alpha_k y(j,k).
Solution two_container_reassign(const MilpInstance& inst, const StructuredView& view,
                                const Solution& sol, const HeuristicBudget& budget, Clock& clock,
                                std::optional<std::pair<int, int>> pair = std::nullopt);
// Evaluates the objective of a full item assignment independently of the
// y and z columns of a solution.
double item_placement_objective(const StructuredView& view, std::span<const int> container_of);

// ---- Workload ----

struct TightenedWorkload {
  MilpInstance inst;
  bool define_x_eliminated = false;
};

// Capacity rows become sum_i x(i,j) <= b_j y_j. When every accessible pair
// has a_i < b_j the define-x rows are dropped and x(i,j) is bounded by a_i
// instead.
TightenedWorkload tighten_workload(const MilpInstance& inst, const StructuredView& view);

// y_j = 1 for every machine with positive LP value; x kept from the LP.
Solution round_up(const MilpInstance& inst, const StructuredView& view,
                  std::span<const double> lp_x);

struct RoundingState {
  double primal_bound = 0.0;
  double dual_bound = 0.0;  // heuristic only, never exported
  double threshold = 1.0;
  int target = 0;
  double gap_epsilon = 0.0;
};

struct RoundingResult {
  std::optional<Solution> best;
  RoundingState state;
  int iterations = 0;
  std::vector<double> lp_x;
};

// Bisection on the number of open machines. `model` is the original or the
// tightened instance; candidates are offered to `track`.
RoundingResult adaptive_rounding(const MilpInstance& model, const StructuredView& view,
                                 PrimalTrack& track, double gap_epsilon = 0.0);

// Fixes integer variables where incumbent and LP agree within tol.
std::optional<Solution> rins(const MilpInstance& inst, const Solution& incumbent,
                             std::span<const double> lp_sol, double budget, Clock& clock,
                             double tol = 1e-6);

// ---- Time-indexed ----

struct PumpResult {
  std::optional<Solution> solution;
  int iterations = 0;
};

PumpResult feasibility_pump(const MilpInstance& inst, Clock& clock, const Deadline& deadline,
                            int iteration_cap = 200, std::uint64_t seed = 0);

// Fixes integer variables with period < 0.9 H at the guide.
std::optional<Solution> rens(const MilpInstance& inst, std::span<const int> period, int horizon,
                             const Solution& guide, double budget, Clock& clock);

struct HorizonSchedule {
  int fix = 0;     // integer variables with period < fix are fixed
  int relax = 0;   // integer variables with period > relax are continuous
  int ignore = 0;  // rows touching integer variables with period > ignore are dropped
  int delta = 1;
  int horizon = 1;

  static HorizonSchedule initial(int horizon, int divisor = 5);
  // Moves every frontier forward by delta, capped at the horizon.
  bool advance();
  bool done() const { return fix >= horizon; }
};

struct RollingResult {
  std::optional<Solution> best;
  int iterations = 0;
  std::vector<int> fix_frontiers;
};

RollingResult rolling_horizon(const MilpInstance& inst, std::span<const int> period,
                              HorizonSchedule schedule, const Solution& warm,
                              const HeuristicBudget& budget, PrimalTrack& track);

// ---- Pipelines ----

struct PipelineResult {
  BoundsTimeline timeline;
  std::optional<Solution> best;
  std::vector<Solution> incumbents;
};

PipelineResult primal_pipeline(const MilpInstance& inst, const StructuredView& view,
                               const HeuristicBudget& budget, Clock& clock,
                               const HeuristicParams& params = {});

// Heuristic hook for the tree search. At the root it runs the family
// construction (or the pump), later RINS against the node LP.
PrimalHeuristic make_tree_heuristic(const StructuredView* view, const HeuristicParams& params,
                                    double submip_seconds = 1.0);

}  // namespace deskmip
