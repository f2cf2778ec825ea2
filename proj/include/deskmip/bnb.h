// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

// LP-based branch-and-bound without cuts.
//
// The root relaxation is treated as pre-computed: the timeline origin is the
// moment after the root LP, where the dual track starts at its value. Every
// later node LP, strong-branching probe and heuristic call is charged to the
// clock and counts against time_limit.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "deskmip/clock.h"
#include "deskmip/features.h"
#include "deskmip/lp.h"
#include "deskmip/metrics.h"
#include "deskmip/model.h"
#include "deskmip/rng.h"

namespace deskmip {

enum class NodeSelection { kBestBound, kDepthFirst, kHybrid };
enum class BranchingRule { kMostFractional, kRandom, kStrongBranching, kPseudoCost, kLearned };
enum class ChildOrder { kDownFirst, kUpFirst, kNearest };
enum class BnbStatus { kOptimal, kFeasible, kInfeasible, kLimitReached };

const char* to_string(NodeSelection v);
const char* to_string(BranchingRule v);
const char* to_string(ChildOrder v);
const char* to_string(BnbStatus v);

inline constexpr double kSbEpsilon = 1e-6;
inline constexpr double kSbInfeasibleGain = 1e8;

struct BnbConfig {
  NodeSelection node_selection = NodeSelection::kBestBound;
  BranchingRule branching_rule = BranchingRule::kMostFractional;
  std::uint64_t random_seed = 0;
  ScorerParams scorer;  // used by kLearned
  int sb_candidate_limit = 8;
  int pc_reliability = 1;
  ChildOrder child_order = ChildOrder::kDownFirst;
  double time_limit = 20.0;
  long node_limit = 1000000;
  std::optional<double> objective_limit;
  double gap_tolerance = 1e-9;
  int heuristic_frequency = 10;
  bool primal_heuristics_enabled = false;
  double integrality_tol = 1e-6;
  // Sub-MIP solves count their root LP against time_limit too.
  bool root_counts_toward_limit = false;
  // Pivot rule, iteration limit and refactor frequency; the clock and
  // deadline fields are filled in by the solver.
  LpOptions lp;

  // Throws ModelError on a non-positive limit or negative tolerance.
  void validate() const;
};

struct HeuristicCall {
  const MilpInstance* inst = nullptr;
  NodeContext node;
  long nodes_processed = 0;
  Clock* clock = nullptr;
  Deadline deadline;
  const Solution* incumbent = nullptr;
};

// A heuristic returns a candidate point; the solver checks it before use.
using PrimalHeuristic = std::function<std::optional<std::vector<double>>(const HeuristicCall&)>;
// Called once per branching decision, before the children are created.
using BranchObserver =
    std::function<void(const NodeContext&, std::span<const int> candidates, int chosen)>;

struct BnbHooks {
  PrimalHeuristic heuristic;
  BranchObserver on_branch;
};

struct BnbResult {
  BnbStatus status = BnbStatus::kLimitReached;
  std::optional<Solution> best;
  BoundsTimeline timeline;
  long nodes = 0;
  long lp_iterations = 0;
  int max_probe_lps_per_node = 0;
  double root_lp_objective = 0.0;
};

// Throws ModelError when an integer variable has an infinite bound or the
// warm solution is infeasible. A null clock means a private simulated clock.
BnbResult solve(const MilpInstance& inst, const BnbConfig& cfg,
                const std::optional<Solution>& warm = std::nullopt, Clock* clock = nullptr,
                const BnbHooks& hooks = {});

struct NodeState {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> x;
  double objective = 0.0;
  LpBasis basis;  // node LP basis; probes start from it when non-empty
};

struct StrongBranchingResult {
  // Aligned with the candidate list. Candidates cut by the limit score -1.
  std::vector<double> scores;
  std::vector<double> down_gain;
  std::vector<double> up_gain;
  int lp_solves = 0;
};

// Probes the `limit` most fractional candidates (ties to the lower index).
// Throws std::invalid_argument if a candidate is not fractional.
StrongBranchingResult strong_branching(const LpSolver& lp, const NodeState& node,
                                       std::span<const int> candidates, int limit,
                                       const LpOptions& opts, double integrality_tol = 1e-6);

std::vector<double> strong_branching_scores(const MilpInstance& inst, const NodeState& node,
                                            std::span<const int> candidates, int limit);

// The limit most fractional candidates, ordered by decreasing fractionality.
std::vector<int> most_fractional_subset(std::span<const int> candidates,
                                        std::span<const double> x, int limit);

struct BranchContext {
  std::span<const int> candidates;  // ascending variable indices
  std::span<const double> x;
  std::span<const double> scores;  // aligned with candidates; rule-dependent
  Rng* rng = nullptr;
};

// Returns the chosen variable index. Throws std::invalid_argument when there
// is no candidate.
int branch_select(BranchingRule rule, const BranchContext& ctx);

// Best solution of the restricted problem found within budget. Values are
// indexed like the original instance.
std::optional<Solution> solve_submip(const MilpInstance& inst, const std::map<int, double>& fixings,
                                     const std::set<int>& relaxations,
                                     const std::set<int>& dropped_constraints, double budget,
                                     Clock* clock = nullptr,
                                     const std::optional<Solution>& warm = std::nullopt);

}  // namespace deskmip
