// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskmip/bnb.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>

namespace deskmip {

const char* to_string(NodeSelection v) {
  switch (v) {
    case NodeSelection::kBestBound:
      return "best_bound";
    case NodeSelection::kDepthFirst:
      return "depth_first";
    case NodeSelection::kHybrid:
      return "hybrid";
  }
  return "?";
}

const char* to_string(BranchingRule v) {
  switch (v) {
    case BranchingRule::kMostFractional:
      return "most_fractional";
    case BranchingRule::kRandom:
      return "random";
    case BranchingRule::kStrongBranching:
      return "strong";
    case BranchingRule::kPseudoCost:
      return "pseudocost";
    case BranchingRule::kLearned:
      return "learned";
  }
  return "?";
}

const char* to_string(ChildOrder v) {
  switch (v) {
    case ChildOrder::kDownFirst:
      return "down_first";
    case ChildOrder::kUpFirst:
      return "up_first";
    case ChildOrder::kNearest:
      return "nearest";
  }
  return "?";
}

const char* to_string(BnbStatus v) {
  switch (v) {
    case BnbStatus::kOptimal:
      return "optimal";
    case BnbStatus::kFeasible:
      return "feasible";
    case BnbStatus::kInfeasible:
      return "infeasible";
    case BnbStatus::kLimitReached:
      return "limit_reached";
  }
  return "?";
}

void BnbConfig::validate() const {
  if (!(time_limit > 0)) throw ModelError("time_limit must be positive");
  if (node_limit <= 0) throw ModelError("node_limit must be positive");
  if (sb_candidate_limit <= 0) throw ModelError("sb_candidate_limit must be positive");
  if (pc_reliability < 0) throw ModelError("pc_reliability must be non-negative");
  if (heuristic_frequency <= 0) throw ModelError("heuristic_frequency must be positive");
  if (!(gap_tolerance >= 0)) throw ModelError("gap_tolerance must be non-negative");
  if (!(integrality_tol > 0 && integrality_tol < 0.5))
    throw ModelError("integrality_tol must lie in (0, 0.5)");
}

std::vector<int> most_fractional_subset(std::span<const int> candidates,
                                        std::span<const double> x, int limit) {
  std::vector<int> order(candidates.begin(), candidates.end());
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double fa = integrality_distance(x[a]);
    const double fb = integrality_distance(x[b]);
    if (fa != fb) return fa > fb;
    return a < b;
  });
  if (static_cast<int>(order.size()) > limit) order.resize(limit);
  return order;
}

StrongBranchingResult strong_branching(const LpSolver& lp, const NodeState& node,
                                       std::span<const int> candidates, int limit,
                                       const LpOptions& opts, double integrality_tol) {
  for (int j : candidates)
    if (integrality_distance(node.x[j]) <= integrality_tol)
      throw std::invalid_argument("strong branching candidate " + std::to_string(j) +
                                  " is not fractional");
  StrongBranchingResult res;
  res.scores.assign(candidates.size(), -1.0);
  res.down_gain.assign(candidates.size(), 0.0);
  res.up_gain.assign(candidates.size(), 0.0);
  const auto probed = most_fractional_subset(candidates, node.x, limit);
  std::vector<double> lo = node.lower;
  std::vector<double> hi = node.upper;
  const LpBasis* warm = node.basis.empty() ? nullptr : &node.basis;
  auto gain = [&](const LpResult& r) {
    if (r.status == LpStatus::kInfeasible) return kSbInfeasibleGain;
    if (r.status != LpStatus::kOptimal) return 0.0;
    return std::max(r.objective - node.objective, 0.0);
  };
  for (int j : probed) {
    const auto pos = static_cast<std::size_t>(
        std::find(candidates.begin(), candidates.end(), j) - candidates.begin());
    const double v = node.x[j];
    hi[j] = std::floor(v);
    const double down = gain(lp.solve(lo, hi, opts, warm));
    hi[j] = node.upper[j];
    lo[j] = std::ceil(v);
    const double up = gain(lp.solve(lo, hi, opts, warm));
    lo[j] = node.lower[j];
    res.lp_solves += 2;
    res.down_gain[pos] = down;
    res.up_gain[pos] = up;
    res.scores[pos] = std::max(down, kSbEpsilon) * std::max(up, kSbEpsilon);
  }
  return res;
}

std::vector<double> strong_branching_scores(const MilpInstance& inst, const NodeState& node,
                                            std::span<const int> candidates, int limit) {
  const LpSolver lp(inst);
  return strong_branching(lp, node, candidates, limit, LpOptions{}).scores;
}

int branch_select(BranchingRule rule, const BranchContext& ctx) {
  if (ctx.candidates.empty()) throw std::invalid_argument("branch_select: no fractional candidate");
  switch (rule) {
    case BranchingRule::kMostFractional: {
      std::size_t best = 0;
      for (std::size_t k = 1; k < ctx.candidates.size(); ++k)
        if (integrality_distance(ctx.x[ctx.candidates[k]]) >
            integrality_distance(ctx.x[ctx.candidates[best]]))
          best = k;
      return ctx.candidates[best];
    }
    case BranchingRule::kRandom: {
      if (!ctx.rng) throw std::invalid_argument("branch_select: random rule needs a stream");
      const auto k = ctx.rng->uniform_int(0, static_cast<std::int64_t>(ctx.candidates.size()) - 1);
      return ctx.candidates[static_cast<std::size_t>(k)];
    }
    case BranchingRule::kStrongBranching:
    case BranchingRule::kPseudoCost:
    case BranchingRule::kLearned:
      if (ctx.scores.size() != ctx.candidates.size())
        throw std::invalid_argument("branch_select: score vector size mismatch");
      return ctx.candidates[argmax(ctx.scores)];
  }
  return ctx.candidates.front();
}

namespace {

struct BoundChange {
  int var;
  double lo;
  double hi;
};

struct Node {
  long id = 0;
  int depth = 0;
  double bound = 0.0;
  std::vector<BoundChange> changes;
  std::shared_ptr<const LpBasis> parent_basis;
  // Branching that created this node, for pseudo-cost updates.
  int branch_var = -1;
  bool branch_up = false;
  double branch_dist = 0.0;
  double parent_objective = 0.0;
};

class TreeSearch {
 public:
  TreeSearch(const MilpInstance& inst, const BnbConfig& cfg, Clock& clock, const BnbHooks& hooks)
      : inst_(inst),
        cfg_(cfg),
        clock_(clock),
        hooks_(hooks),
        lp_(inst),
        scales_(InstanceScales::of(inst)),
        pc_(inst.num_vars()),
        rng_(cfg.random_seed),
        depth_first_(cfg.node_selection != NodeSelection::kBestBound) {}

  BnbResult run(const std::optional<Solution>& warm) {
    BnbResult res;
    auto& tl = res.timeline;
    tl.horizon = cfg_.time_limit;
    lp_opts_ = cfg_.lp;
    lp_opts_.clock = &clock_;

    if (cfg_.root_counts_toward_limit) start();
    const LpResult root = lp_.solve(inst_.lower, inst_.upper, lp_opts_);
    res.lp_iterations += root.iterations;
    if (!cfg_.root_counts_toward_limit) start();

    if (cfg_.objective_limit)
      tl.initial_primal = *cfg_.objective_limit;
    else if (warm)
      tl.initial_primal = warm->objective;

    if (root.status == LpStatus::kUnbounded) throw ModelError("LP relaxation is unbounded");
    if (root.status == LpStatus::kInfeasible) {
      res.status = BnbStatus::kInfeasible;
      return finish(res);
    }
    if (root.status != LpStatus::kOptimal) {
      if (warm) accept(warm->values, res);
      res.status = best_ ? BnbStatus::kFeasible : BnbStatus::kLimitReached;
      return finish(res);
    }
    res.root_lp_objective = root.objective;
    tl.initial_dual = std::min(root.objective, primal_value());
    tl.events.push_back({0.0, EventKind::kDualUpdate, *tl.initial_dual});
    if (warm && accept(warm->values, res) && tl.events.back().kind != EventKind::kPrimalUpdate)
      tl.events.push_back({0.0, EventKind::kPrimalUpdate, best_->objective});

    push(Node{next_id_++, 0, root.objective, {}, nullptr, -1, false, 0.0, root.objective});
    bool limit_hit = false;
    bool first = true;
    while (!open_.empty()) {
      if (deadline_.expired() || res.nodes >= cfg_.node_limit) {
        limit_hit = true;
        break;
      }
      Node node = pop();
      if (prunable(node.bound)) {
        update_dual(res);
        continue;
      }
      for (const auto& c : node.changes) {
        lower_[c.var] = c.lo;
        upper_[c.var] = c.hi;
      }
      LpResult lp;
      if (first) {
        lp = root;
        first = false;
      } else {
        lp = lp_.solve(lower_, upper_, lp_opts_, node.parent_basis.get());
        res.lp_iterations += lp.iterations;
      }
      if (lp.status == LpStatus::kIterationLimit && deadline_.expired()) {
        restore(node);
        push(std::move(node));
        limit_hit = true;
        break;
      }
      ++res.nodes;
      clock_.charge(clock_.costs().node_seconds);
      tl.node(now(), static_cast<double>(res.nodes));
      process(node, lp, res);
      restore(node);
      update_dual(res);
      if (gap_closed()) break;
    }

    if (open_.empty() && lost_bound_ == kInf) {
      res.status = best_ ? BnbStatus::kOptimal : BnbStatus::kInfeasible;
    } else if (gap_closed()) {
      res.status = BnbStatus::kOptimal;
    } else {
      res.status = best_ ? BnbStatus::kFeasible : BnbStatus::kLimitReached;
    }
    (void)limit_hit;
    return finish(res);
  }

 private:
  void start() {
    t0_ = clock_.now();
    deadline_ = Deadline(&clock_, cfg_.time_limit);
    lp_opts_.deadline = deadline_;
    lower_ = inst_.lower;
    upper_ = inst_.upper;
  }

  double now() const { return std::clamp(clock_.now() - t0_, 0.0, cfg_.time_limit); }

  BnbResult finish(BnbResult& res) {
    if (res.status == BnbStatus::kOptimal && best_) {
      res.timeline.improve_dual(now(), best_->objective);
    } else if (res.status == BnbStatus::kInfeasible && cfg_.objective_limit &&
               res.timeline.initial_dual) {
      // Exhausted tree: nothing strictly below the limit exists.
      res.timeline.improve_dual(now(), *cfg_.objective_limit);
    }
    res.best = best_;
    res.max_probe_lps_per_node = max_probes_;
    return std::move(res);
  }

  double primal_value() const {
    if (best_) return best_->objective;
    if (cfg_.objective_limit) return *cfg_.objective_limit;
    return kInf;
  }

  double prune_slack(double v) const {
    return std::max(1e-9, cfg_.gap_tolerance * (1.0 + std::abs(v)));
  }

  bool prunable(double bound) const {
    if (best_) return bound >= best_->objective - prune_slack(best_->objective);
    if (cfg_.objective_limit) return bound > *cfg_.objective_limit + 1e-9;
    return false;
  }

  double global_dual() const {
    double db = lost_bound_;
    if (!open_bounds_.empty()) db = std::min(db, *open_bounds_.begin());
    return std::min(db, primal_value());
  }

  bool gap_closed() const {
    if (!best_) return false;
    const double db = global_dual();
    return best_->objective - db <= cfg_.gap_tolerance * (1.0 + std::abs(best_->objective));
  }

  void update_dual(BnbResult& res) {
    const double db = global_dual();
    if (std::isfinite(db)) res.timeline.improve_dual(now(), db);
  }

  // Accepts a candidate point if it is feasible and improves the incumbent.
  bool accept(std::span<const double> x, BnbResult& res) {
    std::vector<double> v(x.begin(), x.end());
    for (int j = 0; j < inst_.num_vars(); ++j)
      if (inst_.is_integer[j]) v[j] = std::round(v[j]);
    if (!check_feasibility(inst_, v, 1e-6).feasible) return false;
    Solution s(inst_, std::move(v));
    if (best_) {
      if (!(s.objective < best_->objective - 1e-9)) return false;
    } else if (cfg_.objective_limit && s.objective > *cfg_.objective_limit + 1e-9) {
      return false;
    }
    best_ = std::move(s);
    res.timeline.improve_primal(now(), best_->objective);
    return true;
  }

  void process(const Node& node, const LpResult& lp, BnbResult& res) {
    if (node.branch_var >= 0 && lp.status == LpStatus::kOptimal)
      pc_.update(node.branch_var, node.branch_up,
                 std::max(lp.objective - node.parent_objective, 0.0) / node.branch_dist);
    if (lp.status != LpStatus::kOptimal) {
      if (lp.status != LpStatus::kInfeasible) lost_bound_ = std::min(lost_bound_, node.bound);
      return;
    }
    if (prunable(lp.objective)) return;

    std::vector<int> candidates;
    for (int j = 0; j < inst_.num_vars(); ++j)
      if (inst_.is_integer[j] && integrality_distance(lp.x[j]) > cfg_.integrality_tol)
        candidates.push_back(j);
    if (candidates.empty()) {
      if (accept(lp.x, res) && cfg_.node_selection == NodeSelection::kHybrid && depth_first_) {
        depth_first_ = false;
        reheap();
      }
      return;
    }

    NodeContext ctx;
    ctx.inst = &inst_;
    ctx.scales = &scales_;
    ctx.lower = lower_;
    ctx.upper = upper_;
    ctx.x = lp.x;
    ctx.lp_objective = lp.objective;
    ctx.depth = node.depth;
    ctx.incumbent = best_ ? &best_->values : nullptr;
    ctx.pseudo_costs = &pc_;
    ctx.lp_basis = &lp.basis;

    if (cfg_.primal_heuristics_enabled && hooks_.heuristic &&
        (res.nodes - 1) % cfg_.heuristic_frequency == 0) {
      HeuristicCall call{&inst_, ctx, res.nodes, &clock_, deadline_, best_ ? &*best_ : nullptr};
      if (auto x = hooks_.heuristic(call)) {
        if (accept(*x, res) && cfg_.node_selection == NodeSelection::kHybrid && depth_first_) {
          depth_first_ = false;
          reheap();
        }
      }
      ctx.incumbent = best_ ? &best_->values : nullptr;
      if (prunable(lp.objective)) return;
    }

    const int var = choose(ctx, candidates, lp);
    if (hooks_.on_branch) hooks_.on_branch(ctx, candidates, var);

    const double v = lp.x[var];
    const double down_hi = std::floor(v);
    const double up_lo = std::ceil(v);
    bool up_first = false;
    switch (cfg_.child_order) {
      case ChildOrder::kDownFirst:
        break;
      case ChildOrder::kUpFirst:
        up_first = true;
        break;
      case ChildOrder::kNearest:
        up_first = v - down_hi >= 0.5;
        break;
    }
    const auto basis = std::make_shared<const LpBasis>(lp.basis);
    for (int k = 0; k < 2; ++k) {
      const bool up = (k == 0) == up_first;
      // A probed child carries its own LP bound; an infeasible one is dropped.
      double bound = lp.objective;
      if (probe_ && probe_->var == var) {
        const double gain = up ? probe_->up : probe_->down;
        if (gain >= kSbInfeasibleGain) continue;
        bound += gain;
        if (prunable(bound)) continue;
      }
      Node child;
      child.id = next_id_++;
      child.depth = node.depth + 1;
      child.bound = bound;
      child.parent_objective = lp.objective;
      child.changes = node.changes;
      child.parent_basis = basis;
      if (up)
        child.changes.push_back({var, up_lo, upper_[var]});
      else
        child.changes.push_back({var, lower_[var], down_hi});
      child.branch_var = var;
      child.branch_up = up;
      child.branch_dist = up ? up_lo - v : v - down_hi;
      push(std::move(child));
    }
  }

  int choose(const NodeContext& ctx, const std::vector<int>& candidates, const LpResult& lp) {
    probe_.reset();
    std::vector<double> scores;
    switch (cfg_.branching_rule) {
      case BranchingRule::kMostFractional:
      case BranchingRule::kRandom:
        break;
      case BranchingRule::kStrongBranching: {
        const NodeState st{lower_, upper_, lp.x, lp.objective, lp.basis};
        auto sb = strong_branching(lp_, st, candidates, cfg_.sb_candidate_limit, lp_opts_,
                                   cfg_.integrality_tol);
        max_probes_ = std::max(max_probes_, sb.lp_solves);
        for (std::size_t r = 0; r < candidates.size(); ++r)
          if (sb.scores[r] >= 0) record_probe(candidates[r], lp.x[candidates[r]], sb, r);
        remember_probes(candidates, sb);
        scores = std::move(sb.scores);
        break;
      }
      case BranchingRule::kPseudoCost: {
        std::vector<int> unreliable;
        for (int j : candidates)
          if (pc_.count(j, false) < cfg_.pc_reliability || pc_.count(j, true) < cfg_.pc_reliability)
            unreliable.push_back(j);
        if (!unreliable.empty()) {
          const NodeState st{lower_, upper_, lp.x, lp.objective, lp.basis};
          auto sb = strong_branching(lp_, st, unreliable, cfg_.sb_candidate_limit, lp_opts_,
                                     cfg_.integrality_tol);
          max_probes_ = std::max(max_probes_, sb.lp_solves);
          for (std::size_t r = 0; r < unreliable.size(); ++r)
            if (sb.scores[r] >= 0) record_probe(unreliable[r], lp.x[unreliable[r]], sb, r);
          remember_probes(unreliable, sb);
        }
        scores.resize(candidates.size());
        for (std::size_t r = 0; r < candidates.size(); ++r) {
          const int j = candidates[r];
          const double x = lp.x[j];
          const double down = pc_.per_unit(j, false) * (x - std::floor(x));
          const double up = pc_.per_unit(j, true) * (std::ceil(x) - x);
          scores[r] = std::max(down, kSbEpsilon) * std::max(up, kSbEpsilon);
        }
        break;
      }
      case BranchingRule::kLearned:
        scores = score_all(cfg_.scorer, extract_features(ctx, candidates));
        break;
    }
    const BranchContext bc{candidates, lp.x, scores, &rng_};
    const int var = branch_select(cfg_.branching_rule, bc);
    if (auto it = probes_.find(var); it != probes_.end()) probe_ = it->second;
    probes_.clear();
    return var;
  }

  void remember_probes(std::span<const int> vars, const StrongBranchingResult& sb) {
    for (std::size_t r = 0; r < vars.size(); ++r)
      if (sb.scores[r] >= 0) probes_[vars[r]] = Probe{vars[r], sb.down_gain[r], sb.up_gain[r]};
  }

  void record_probe(int j, double x, const StrongBranchingResult& sb, std::size_t r) {
    if (sb.down_gain[r] < kSbInfeasibleGain)
      pc_.update(j, false, sb.down_gain[r] / (x - std::floor(x)));
    if (sb.up_gain[r] < kSbInfeasibleGain) pc_.update(j, true, sb.up_gain[r] / (std::ceil(x) - x));
  }

  struct Probe {
    int var;
    double down;
    double up;
  };
  std::map<int, Probe> probes_;
  std::optional<Probe> probe_;

  void restore(const Node& node) {
    for (const auto& c : node.changes) {
      lower_[c.var] = inst_.lower[c.var];
      upper_[c.var] = inst_.upper[c.var];
    }
  }

  // Heap order: the top is the node processed next.
  bool later(const Node& a, const Node& b) const {
    if (depth_first_) {
      if (a.depth != b.depth) return a.depth < b.depth;
      return a.id > b.id;
    }
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }

  void push(Node node) {
    open_bounds_.insert(node.bound);
    open_.push_back(std::move(node));
    std::push_heap(open_.begin(), open_.end(),
                   [this](const Node& a, const Node& b) { return later(a, b); });
  }

  Node pop() {
    std::pop_heap(open_.begin(), open_.end(),
                  [this](const Node& a, const Node& b) { return later(a, b); });
    Node node = std::move(open_.back());
    open_.pop_back();
    open_bounds_.erase(open_bounds_.find(node.bound));
    return node;
  }

  void reheap() {
    std::make_heap(open_.begin(), open_.end(),
                   [this](const Node& a, const Node& b) { return later(a, b); });
  }

  const MilpInstance& inst_;
  const BnbConfig& cfg_;
  Clock& clock_;
  const BnbHooks& hooks_;
  LpSolver lp_;
  InstanceScales scales_;
  PseudoCosts pc_;
  Rng rng_;
  LpOptions lp_opts_;
  Deadline deadline_;
  double t0_ = 0.0;
  std::vector<double> lower_, upper_;
  std::vector<Node> open_;
  std::multiset<double> open_bounds_;
  bool depth_first_;
  long next_id_ = 0;
  double lost_bound_ = kInf;
  int max_probes_ = 0;
  std::optional<Solution> best_;
};

}  // namespace

BnbResult solve(const MilpInstance& inst, const BnbConfig& cfg, const std::optional<Solution>& warm,
                Clock* clock, const BnbHooks& hooks) {
  cfg.validate();
  if (!inst.integers_bounded())
    throw ModelError("integer variable with an infinite bound in " + inst.name);
  if (warm) {
    if (static_cast<int>(warm->values.size()) != inst.num_vars() ||
        !check_feasibility(inst, warm->values, 1e-6).feasible)
      throw ModelError("warm solution is infeasible");
  }
  SimulatedClock own;
  Clock& c = clock ? *clock : own;
  TreeSearch search(inst, cfg, c, hooks);
  return search.run(warm);
}

std::optional<Solution> solve_submip(const MilpInstance& inst, const std::map<int, double>& fixings,
                                     const std::set<int>& relaxations,
                                     const std::set<int>& dropped_constraints, double budget,
                                     Clock* clock, const std::optional<Solution>& warm) {
  if (!(budget > 0)) throw ModelError("sub-MIP budget must be positive");
  const MilpInstance sub =
      drop_constraints(relax_integrality(fix_variables(inst, fixings), relaxations),
                       dropped_constraints);
  std::optional<Solution> start;
  if (warm && static_cast<int>(warm->values.size()) == sub.num_vars() &&
      check_feasibility(sub, warm->values, 1e-6).feasible)
    start = Solution(sub, warm->values);
  BnbConfig cfg;
  cfg.node_selection = NodeSelection::kHybrid;
  cfg.time_limit = budget;
  cfg.root_counts_toward_limit = true;
  const BnbResult r = solve(sub, cfg, start, clock);
  if (!r.best) return std::nullopt;
  return Solution(inst, r.best->values);
}

}  // namespace deskmip
