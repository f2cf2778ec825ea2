// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskmip/tuner.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "deskmip/lp.h"
#include "deskmip/metrics.h"
#include "deskmip/parallel.h"
#include "deskmip/rng.h"

namespace deskmip {

namespace {

double num(const nlohmann::json& v) { return v.get<double>(); }

// Position of v inside [lo, hi] on the parameter's own scale.
double unit(const ParamDef& p, double v) {
  if (p.hi <= p.lo) return 0.0;
  if (p.log) return (std::log(v) - std::log(p.lo)) / (std::log(p.hi) - std::log(p.lo));
  return (v - p.lo) / (p.hi - p.lo);
}

nlohmann::json from_unit(const ParamDef& p, double u) {
  u = std::clamp(u, 0.0, 1.0);
  double v = p.log ? std::exp(std::log(p.lo) + u * (std::log(p.hi) - std::log(p.lo)))
                   : p.lo + u * (p.hi - p.lo);
  v = std::clamp(v, p.lo, p.hi);
  if (p.kind == ParamKind::kInt)
    return static_cast<long>(std::clamp(std::round(v), p.lo, p.hi));
  return v;
}

nlohmann::json sample_value(const ParamDef& p, Rng& rng) {
  if (p.kind == ParamKind::kCategorical)
    return p.values[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(p.values.size()) - 1))];
  if (p.kind == ParamKind::kInt && !p.log)
    return static_cast<long>(rng.uniform_int(static_cast<std::int64_t>(p.lo),
                                              static_cast<std::int64_t>(p.hi)));
  return from_unit(p, rng.uniform());
}

Config sample_partial(const ParamSpace& space, std::span<const int> params, Rng& rng) {
  Config c = Config::object();
  for (int i : params) c[space.params[i].name] = sample_value(space.params[i], rng);
  return c;
}

Config merged(const Config& full, const Config& partial) {
  Config c = full;
  for (const auto& [k, v] : partial.items()) c[k] = v;
  return c;
}

const nlohmann::json& value_of(const ParamDef& p, const Config& c) {
  auto it = c.find(p.name);
  return it == c.end() ? p.default_value : *it;
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

ParamDef ParamDef::categorical(std::string name, std::vector<std::string> values,
                               std::string def) {
  ParamDef p;
  p.name = std::move(name);
  p.kind = ParamKind::kCategorical;
  p.values = std::move(values);
  p.default_value = std::move(def);
  return p;
}

ParamDef ParamDef::integer(std::string name, long lo, long hi, long def, bool log) {
  ParamDef p;
  p.name = std::move(name);
  p.kind = ParamKind::kInt;
  p.lo = static_cast<double>(lo);
  p.hi = static_cast<double>(hi);
  p.log = log;
  p.default_value = def;
  return p;
}

ParamDef ParamDef::real(std::string name, double lo, double hi, double def, bool log) {
  ParamDef p;
  p.name = std::move(name);
  p.kind = ParamKind::kFloat;
  p.lo = lo;
  p.hi = hi;
  p.log = log;
  p.default_value = def;
  return p;
}

bool ParamDef::contains(const nlohmann::json& v) const {
  switch (kind) {
    case ParamKind::kCategorical:
      return v.is_string() &&
             std::find(values.begin(), values.end(), v.get<std::string>()) != values.end();
    case ParamKind::kInt:
      return v.is_number_integer() && num(v) >= lo && num(v) <= hi;
    case ParamKind::kFloat:
      return v.is_number() && num(v) >= lo && num(v) <= hi;
  }
  return false;
}

void ParamSpace::validate() const {
  std::set<std::string> names;
  for (const auto& p : params) {
    if (!names.insert(p.name).second)
      throw std::invalid_argument("duplicate parameter " + p.name);
    if (p.kind == ParamKind::kCategorical && p.values.empty())
      throw std::invalid_argument(p.name + ": no categorical values");
    if (p.kind != ParamKind::kCategorical && (!(p.lo <= p.hi) || (p.log && p.lo <= 0)))
      throw std::invalid_argument(p.name + ": bad bounds");
    if (!p.contains(p.default_value))
      throw std::invalid_argument(p.name + ": default outside the domain");
  }
  if (!subspace_names.empty() && subspace_names.size() != partition.size())
    throw std::invalid_argument("one name per sub-space");
  std::vector<int> seen(params.size(), 0);
  for (const auto& block : partition)
    for (int i : block) {
      if (i < 0 || i >= static_cast<int>(params.size()))
        throw std::invalid_argument("partition index out of range");
      ++seen[i];
    }
  for (std::size_t i = 0; i < params.size(); ++i)
    if (seen[i] != 1)
      throw std::invalid_argument("partition must cover " + params[i].name + " exactly once");
}

Config ParamSpace::defaults() const {
  Config c = Config::object();
  for (const auto& p : params) c[p.name] = p.default_value;
  return c;
}

int ParamSpace::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i].name == name) return static_cast<int>(i);
  return -1;
}

std::vector<int> ParamSpace::free_params(int subspace) const {
  std::vector<int> out;
  for (int i : partition.at(subspace))
    if (!params[i].frozen) out.push_back(i);
  return out;
}

ParamSpace default_space() {
  ParamSpace s;
  // Defaults mirror BnbConfig, HeuristicParams and LpOptions.
  s.params = {
      ParamDef::categorical("branching_rule", {"most_fractional", "pseudocost", "strong", "random"},
                            "most_fractional"),
      ParamDef::integer("sb_candidate_limit", 1, 16, 8),
      ParamDef::integer("pc_reliability", 1, 8, 1),
      ParamDef::categorical("node_selection", {"best_bound", "depth_first", "hybrid"},
                            "best_bound"),
      ParamDef::categorical("child_order", {"down", "up", "nearest"}, "down"),
      ParamDef::categorical("primal_heuristics", {"off", "on"}, "off"),
      ParamDef::integer("heuristic_frequency", 1, 100, 10, true),
      ParamDef::integer("fp_iteration_cap", 10, 500, 200, true),
      ParamDef::real("rins_fixing_tolerance", 1e-9, 1e-1, 1e-6, true),
      ParamDef::real("rounding_gap_epsilon", 0.0, 0.5, 0.0),
      ParamDef::integer("rh_delta_divisor", 2, 10, 5),
      ParamDef::real("submip_seconds", 0.1, 5.0, 1.0, true),
      ParamDef::categorical("pivot_rule", {"dantzig", "bland"}, "dantzig"),
      ParamDef::integer("lp_iteration_limit", 1000, 100000, 100000, true),
      ParamDef::integer("refactor_frequency", 20, 200, 100),
  };
  s.partition = {{0, 1, 2}, {3, 4}, {5, 6, 7, 8, 9, 10, 11}, {12, 13, 14}};
  s.subspace_names = {"branching", "node_selection", "heuristics", "lp"};
  return s;
}

SolverSetup apply_config(const Config& config) {
  if (!config.is_object()) throw std::invalid_argument("configuration must be a JSON object");
  SolverSetup s;
  auto str = [](const std::string& k, const nlohmann::json& v) {
    if (!v.is_string()) throw std::invalid_argument(k + " must be a string");
    return v.get<std::string>();
  };
  auto integer = [](const std::string& k, const nlohmann::json& v) {
    if (!v.is_number_integer()) throw std::invalid_argument(k + " must be an integer");
    return v.get<long>();
  };
  auto real = [](const std::string& k, const nlohmann::json& v) {
    if (!v.is_number()) throw std::invalid_argument(k + " must be a number");
    return v.get<double>();
  };
  auto bad = [](const std::string& k, const std::string& v) {
    return std::invalid_argument("unknown value '" + v + "' for " + k);
  };
  for (const auto& [k, v] : config.items()) {
    if (k == "branching_rule") {
      const auto x = str(k, v);
      if (x == "most_fractional")
        s.bnb.branching_rule = BranchingRule::kMostFractional;
      else if (x == "pseudocost")
        s.bnb.branching_rule = BranchingRule::kPseudoCost;
      else if (x == "strong")
        s.bnb.branching_rule = BranchingRule::kStrongBranching;
      else if (x == "random")
        s.bnb.branching_rule = BranchingRule::kRandom;
      else
        throw bad(k, x);
    } else if (k == "sb_candidate_limit") {
      s.bnb.sb_candidate_limit = static_cast<int>(integer(k, v));
    } else if (k == "pc_reliability") {
      s.bnb.pc_reliability = static_cast<int>(integer(k, v));
    } else if (k == "node_selection") {
      const auto x = str(k, v);
      if (x == "best_bound")
        s.bnb.node_selection = NodeSelection::kBestBound;
      else if (x == "depth_first")
        s.bnb.node_selection = NodeSelection::kDepthFirst;
      else if (x == "hybrid")
        s.bnb.node_selection = NodeSelection::kHybrid;
      else
        throw bad(k, x);
    } else if (k == "child_order") {
      const auto x = str(k, v);
      if (x == "down")
        s.bnb.child_order = ChildOrder::kDownFirst;
      else if (x == "up")
        s.bnb.child_order = ChildOrder::kUpFirst;
      else if (x == "nearest")
        s.bnb.child_order = ChildOrder::kNearest;
      else
        throw bad(k, x);
    } else if (k == "primal_heuristics") {
      const auto x = str(k, v);
      if (x != "on" && x != "off") throw bad(k, x);
      s.bnb.primal_heuristics_enabled = x == "on";
    } else if (k == "heuristic_frequency") {
      s.bnb.heuristic_frequency = static_cast<int>(integer(k, v));
    } else if (k == "fp_iteration_cap") {
      s.heuristics.fp_iteration_cap = static_cast<int>(integer(k, v));
    } else if (k == "rins_fixing_tolerance") {
      s.heuristics.rins_fixing_tolerance = real(k, v);
    } else if (k == "rounding_gap_epsilon") {
      s.heuristics.rounding_gap_epsilon = real(k, v);
    } else if (k == "rh_delta_divisor") {
      s.heuristics.rh_delta_divisor = static_cast<int>(integer(k, v));
    } else if (k == "submip_seconds") {
      s.submip_seconds = real(k, v);
    } else if (k == "pivot_rule") {
      const auto x = str(k, v);
      if (x == "dantzig")
        s.bnb.lp.pivot_rule = PivotRule::kDantzig;
      else if (x == "bland")
        s.bnb.lp.pivot_rule = PivotRule::kBland;
      else
        throw bad(k, x);
    } else if (k == "lp_iteration_limit") {
      s.bnb.lp.iteration_limit = static_cast<int>(integer(k, v));
    } else if (k == "refactor_frequency") {
      s.bnb.lp.refactor_frequency = static_cast<int>(integer(k, v));
    } else {
      throw std::invalid_argument("unknown parameter " + k);
    }
  }
  return s;
}

ConfigEvaluation evaluate_config(const Config& config, std::span<const Generated> instances,
                                 const EvalOptions& opts) {
  if (instances.empty()) throw std::invalid_argument("evaluate_config: no instances");
  for (const auto& g : instances)
    if (static_cast<int>(g.view.trivial_solution.size()) != g.inst.num_vars())
      throw std::invalid_argument("evaluate_config: " + g.inst.name + " has no trivial solution");
  const SolverSetup setup = apply_config(config);
  BnbConfig cfg = setup.bnb;
  cfg.time_limit = opts.budget;
  cfg.validate();
  ConfigEvaluation ev;
  const int n = static_cast<int>(instances.size());
  ev.per_instance.assign(n, 0.0);
  ev.failed.assign(n, 0);
  parallel_for(n, opts.threads, [&](int i) {
    const auto& g = instances[i];
    const Solution trivial(g.inst, g.view.trivial_solution);
    try {
      BnbHooks hooks;
      if (cfg.primal_heuristics_enabled)
        hooks.heuristic = make_tree_heuristic(&g.view, setup.heuristics, setup.submip_seconds);
      SimulatedClock clock;
      const auto r = solve(g.inst, cfg, trivial, &clock, hooks);
      const double v = gap_integral(r.timeline);
      if (!std::isfinite(v)) throw MetricError("non-finite gap integral");
      ev.per_instance[i] = v;
    } catch (const std::exception&) {
      // Worst case: the trivial bounds held for the whole budget.
      const auto root = solve_lp(relax_all(g.inst));
      if (root.status != LpStatus::kOptimal) throw;
      ev.per_instance[i] = opts.budget * std::max(0.0, trivial.objective - root.objective);
      ev.failed[i] = 1;
    }
  });
  ev.failures = static_cast<int>(std::count(ev.failed.begin(), ev.failed.end(), 1));
  ev.mean = std::accumulate(ev.per_instance.begin(), ev.per_instance.end(), 0.0) / n;
  return ev;
}

// ---- Surrogate ----

void SurrogateModel::fit(const std::vector<std::vector<double>>& x,
                         const std::vector<double>& y) {
  if (x.empty() || x.size() != y.size()) throw std::invalid_argument("surrogate: bad data");
  dims_ = static_cast<int>(x[0].size());
  for (const auto& row : x)
    if (static_cast<int>(row.size()) != dims_) throw std::invalid_argument("surrogate: ragged data");
  trees_.assign(opts_.trees, {});
  importance_.assign(dims_, 0.0);
  const int n = static_cast<int>(x.size());
  const int mtry = std::clamp(static_cast<int>(std::ceil(opts_.feature_fraction * dims_)), 1,
                              std::max(1, dims_));
  std::vector<int> features(dims_);
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  for (int t = 0; t < opts_.trees; ++t) {
    Rng rng(mix(opts_.seed, static_cast<std::uint64_t>(t)));
    Tree& tree = trees_[t];
    struct Task {
      int node;
      std::vector<int> rows;
      int depth;
    };
    tree.push_back({});
    std::vector<Task> stack{{0, all, 0}};
    while (!stack.empty()) {
      Task task = std::move(stack.back());
      stack.pop_back();
      const auto& rows = task.rows;
      double sum = 0.0, sq = 0.0;
      for (int r : rows) sum += y[r], sq += y[r] * y[r];
      const double cnt = static_cast<double>(rows.size());
      tree[task.node].value = sum / cnt;
      const double sse = std::max(0.0, sq - sum * sum / cnt);
      if (static_cast<int>(rows.size()) < 2 * opts_.min_leaf || sse <= 1e-12 || task.depth >= 64 ||
          dims_ == 0)
        continue;
      std::iota(features.begin(), features.end(), 0);
      for (int k = 0; k < dims_; ++k)
        std::swap(features[k], features[static_cast<std::size_t>(rng.uniform_int(k, dims_ - 1))]);
      // One random cut per sampled feature; the best of them splits the node.
      // Features that are constant here are skipped and do not use up a draw.
      double best_gain = 1e-12, best_thr = 0.0;
      int best_f = -1, tried = 0;
      for (int k = 0; k < dims_ && tried < mtry; ++k) {
        const int f = features[k];
        double lo = kInf, hi = -kInf;
        for (int r : rows) lo = std::min(lo, x[r][f]), hi = std::max(hi, x[r][f]);
        if (!(hi > lo)) continue;
        ++tried;
        const double thr = lo + rng.uniform() * (hi - lo);
        double ls = 0.0, lq = 0.0, nl = 0.0;
        for (int r : rows)
          if (x[r][f] <= thr) ls += y[r], lq += y[r] * y[r], nl += 1.0;
        const double nr = cnt - nl;
        if (nl < opts_.min_leaf || nr < opts_.min_leaf) continue;
        const double rs = sum - ls, rq = sq - lq;
        const double gain = sse - (lq - ls * ls / nl) - (rq - rs * rs / nr);
        if (gain > best_gain) best_gain = gain, best_f = f, best_thr = thr;
      }
      if (best_f < 0) {
        // Every sampled cut was degenerate; retry this node with a new draw.
        if (tried > 0) stack.push_back(std::move(task));
        continue;
      }
      importance_[best_f] += best_gain;
      std::vector<int> left, right;
      for (int r : rows) (x[r][best_f] <= best_thr ? left : right).push_back(r);
      const int l = static_cast<int>(tree.size());
      tree.push_back({});
      tree.push_back({});
      tree[task.node].feature = best_f;
      tree[task.node].threshold = best_thr;
      tree[task.node].left = l;
      tree[task.node].right = l + 1;
      stack.push_back({l + 1, std::move(right), task.depth + 1});
      stack.push_back({l, std::move(left), task.depth + 1});
    }
  }
}

std::pair<double, double> SurrogateModel::predict(std::span<const double> x) const {
  if (trees_.empty()) throw std::logic_error("surrogate: predict before fit");
  if (static_cast<int>(x.size()) != dims_) throw std::invalid_argument("surrogate: bad input");
  std::vector<double> p;
  p.reserve(trees_.size());
  for (const auto& tree : trees_) {
    int k = 0;
    while (tree[k].feature >= 0)
      k = x[tree[k].feature] <= tree[k].threshold ? tree[k].left : tree[k].right;
    p.push_back(tree[k].value);
  }
  const double mean = std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
  double var = 0.0;
  for (double v : p) var += (v - mean) * (v - mean);
  return {mean, var / static_cast<double>(p.size())};
}

std::vector<double> encode(const ParamSpace& space, std::span<const int> params,
                           const Config& config) {
  std::vector<double> out;
  for (int i : params) {
    const auto& p = space.params[i];
    const auto& v = value_of(p, config);
    if (p.kind == ParamKind::kCategorical) {
      const auto s = v.get<std::string>();
      for (const auto& c : p.values) out.push_back(c == s ? 1.0 : 0.0);
    } else {
      out.push_back(unit(p, num(v)));
    }
  }
  return out;
}

std::vector<int> encoding_owners(const ParamSpace& space, std::span<const int> params) {
  std::vector<int> owners;
  for (int i : params) {
    const auto& p = space.params[i];
    const std::size_t w = p.kind == ParamKind::kCategorical ? p.values.size() : 1;
    owners.insert(owners.end(), w, i);
  }
  return owners;
}

double expected_improvement(double mean, double variance, double best, double xi) {
  const double d = best - mean - xi;
  const double sigma = std::sqrt(std::max(variance, 0.0));
  if (sigma < 1e-12) return std::max(d, 0.0);
  const double z = d / sigma;
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  return d * cdf + sigma * pdf;
}

// ---- Space reduction ----

ReduceResult reduce_space(const ParamSpace& space, const ConfigEvaluator& evaluate,
                          const ReduceOptions& opts) {
  space.validate();
  ReduceResult res;
  res.space = space;
  for (const auto& name : opts.allowlist)
    if (space.index_of(name) < 0) throw std::invalid_argument("allowlist names unknown " + name);
  if (!opts.allowlist.empty())
    for (auto& p : res.space.params)
      if (std::find(opts.allowlist.begin(), opts.allowlist.end(), p.name) == opts.allowlist.end())
        p.frozen = true;
  std::vector<int> active;
  for (std::size_t i = 0; i < res.space.params.size(); ++i)
    if (!res.space.params[i].frozen) active.push_back(static_cast<int>(i));
  if (static_cast<int>(active.size()) <= opts.keep) return res;

  Rng rng(mix(opts.seed, 101));
  const Config base = space.defaults();
  std::vector<Config> probes;
  for (int r = 0; r < opts.probes; ++r) probes.push_back(merged(base, sample_partial(space, active, rng)));
  std::vector<double> y(probes.size(), std::numeric_limits<double>::quiet_NaN());
  parallel_for(static_cast<int>(probes.size()), opts.threads, [&](int r) {
    try {
      y[r] = evaluate(probes[r]);
    } catch (const std::exception&) {
    }
  });
  std::vector<std::vector<double>> x;
  std::vector<double> yy;
  for (std::size_t r = 0; r < probes.size(); ++r)
    if (std::isfinite(y[r])) x.push_back(encode(space, active, probes[r])), yy.push_back(y[r]);
  res.successes = static_cast<int>(yy.size());
  if (res.successes < opts.min_successes) {
    res.aborted = true;
    res.space = space;
    return res;
  }
  SurrogateModel model({32, 1, 0.7, mix(opts.seed, 202)});
  model.fit(x, yy);
  const auto owners = encoding_owners(space, active);
  std::vector<double> score(space.params.size(), 0.0);
  for (std::size_t c = 0; c < owners.size(); ++c) score[owners[c]] += model.importance()[c];
  std::vector<int> order = active;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return score[a] > score[b]; });
  for (std::size_t r = 0; r < order.size(); ++r) {
    res.ranking.emplace_back(space.params[order[r]].name, score[order[r]]);
    if (static_cast<int>(r) >= opts.keep) res.space.params[order[r]].frozen = true;
  }
  return res;
}

// ---- Two-layer search ----

namespace {

struct Acquirer {
  const ParamSpace& space;
  const std::vector<int>& params;
  const SurrogateModel& model;
  double best;
  double xi;

  double ei(const Config& c) const {
    const auto [m, v] = model.predict(encode(space, params, c));
    return expected_improvement(m, v, best, xi);
  }

  std::vector<nlohmann::json> neighbours(const ParamDef& p, const nlohmann::json& v) const {
    std::vector<nlohmann::json> out;
    if (p.kind == ParamKind::kCategorical) {
      for (const auto& c : p.values)
        if (c != v.get<std::string>()) out.emplace_back(c);
      return out;
    }
    const double u = unit(p, num(v));
    for (double step : {-0.2, -0.05, 0.05, 0.2}) {
      auto w = from_unit(p, u + step);
      if (p.kind == ParamKind::kInt && w == v) w = static_cast<long>(std::clamp(num(v) + (step > 0 ? 1.0 : -1.0), p.lo, p.hi));
      if (w != v) out.push_back(w);
    }
    return out;
  }

  // Greedy coordinate ascent on the acquisition.
  Config refine(Config c, double& value) const {
    for (int sweep = 0; sweep < 3; ++sweep) {
      bool moved = false;
      for (int i : params) {
        const auto& p = space.params[i];
        for (const auto& w : neighbours(p, c[p.name])) {
          Config t = c;
          t[p.name] = w;
          const double e = ei(t);
          if (e > value + 1e-15) c = std::move(t), value = e, moved = true;
        }
      }
      if (!moved) break;
    }
    return c;
  }
};

}  // namespace

TunerResult tune(const ParamSpace& space, const ConfigEvaluator& evaluate,
                 const TuneOptions& opts) {
  space.validate();
  if (opts.iterations < 1 || opts.batch < 1 || opts.init_samples < 1)
    throw std::invalid_argument("tune: iterations, batch and init_samples must be >= 1");
  std::vector<std::vector<int>> blocks = space.partition;
  std::vector<std::string> names = space.subspace_names;
  if (names.size() != blocks.size()) {
    names.clear();
    for (std::size_t i = 0; i < blocks.size(); ++i) names.push_back("subspace" + std::to_string(i));
  }
  if (opts.k == 1 && blocks.size() != 1) {
    std::vector<int> all;
    for (const auto& b : blocks) all.insert(all.end(), b.begin(), b.end());
    std::sort(all.begin(), all.end());
    blocks = {all};
    names = {"all"};
  } else if (opts.k != 0 && opts.k != static_cast<int>(blocks.size())) {
    throw std::invalid_argument("tune: k must be 1 or the partition size");
  }

  TunerResult res;
  res.best = space.defaults();
  res.best_objective = evaluate(res.best);
  res.default_objective = res.best_objective;
  Rng master(mix(opts.seed, 303));

  for (std::size_t b = 0; b < blocks.size(); ++b) {
    std::vector<int> params;
    for (int i : blocks[b])
      if (!space.params[i].frozen) params.push_back(i);
    SubspaceOutcome out;
    out.name = names[b];
    out.best_objective = res.best_objective;
    Rng rng(master.next());
    if (params.empty()) {
      res.subspaces.push_back(out);
      continue;
    }
    std::vector<Config> xs;
    std::vector<double> ys;
    auto run_batch = [&](std::vector<Config> batch, int iteration) {
      std::vector<double> y(batch.size());
      parallel_for(static_cast<int>(batch.size()), opts.threads,
                   [&](int i) { y[i] = evaluate(merged(res.best, batch[i])); });
      for (std::size_t i = 0; i < batch.size(); ++i) {
        if (!std::isfinite(y[i])) throw std::runtime_error("tune: evaluator returned a non-finite value");
        res.history.push_back({static_cast<int>(b), iteration, batch[i], y[i], res.incumbent_version});
        xs.push_back(std::move(batch[i]));
        ys.push_back(y[i]);
      }
    };
    std::vector<Config> init;
    for (int s = 0; s < opts.init_samples; ++s) init.push_back(sample_partial(space, params, rng));
    run_batch(std::move(init), 0);

    for (int it = 1; it <= opts.iterations; ++it) {
      const double mean = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
      double var = 0.0;
      for (double v : ys) var += (v - mean) * (v - mean);
      const double sd = var > 0 ? std::sqrt(var / ys.size()) : 1.0;
      std::vector<std::vector<double>> X;
      std::vector<double> Y;
      for (std::size_t i = 0; i < xs.size(); ++i)
        X.push_back(encode(space, params, xs[i])), Y.push_back((ys[i] - mean) / sd);
      SurrogateModel model({32, 1, 0.7, rng.next()});
      model.fit(X, Y);
      const Acquirer acq{space, params, model, *std::min_element(Y.begin(), Y.end()), opts.xi};
      std::vector<std::pair<double, Config>> pool;
      for (int c = 0; c < opts.acquisition_candidates; ++c) {
        Config cand = sample_partial(space, params, rng);
        const double e = acq.ei(cand);
        pool.emplace_back(e, std::move(cand));
      }
      std::stable_sort(pool.begin(), pool.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      std::vector<Config> batch;
      for (std::size_t c = 0; c < pool.size() && static_cast<int>(batch.size()) < opts.batch; ++c) {
        double e = pool[c].first;
        Config r = acq.refine(pool[c].second, e);
        if (std::find(batch.begin(), batch.end(), r) == batch.end()) batch.push_back(std::move(r));
      }
      while (static_cast<int>(batch.size()) < opts.batch) batch.push_back(pool.front().second);
      run_batch(std::move(batch), it);
    }

    const auto best_it = std::min_element(ys.begin(), ys.end());
    const std::size_t bi = static_cast<std::size_t>(best_it - ys.begin());
    out.best_partial = xs[bi];
    out.best_objective = ys[bi];
    if (ys[bi] < res.best_objective) {
      // Re-check the merged configuration before it replaces the incumbent.
      Config cand = merged(res.best, xs[bi]);
      const double yc = evaluate(cand);
      if (yc <= res.best_objective) {
        res.best = std::move(cand);
        res.best_objective = yc;
        ++res.incumbent_version;
        out.merged = true;
      }
    }
    res.subspaces.push_back(std::move(out));
  }
  return res;
}

std::string history_to_jsonl(const TunerResult& r) {
  std::string out;
  for (const auto& t : r.history) {
    const nlohmann::json j = {{"subspace", t.subspace},
                              {"iteration", t.iteration},
                              {"partial", t.partial},
                              {"objective", t.objective},
                              {"incumbent_version", t.incumbent_version}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

// ---- Clustering ----

std::vector<double> instance_summary(const MilpInstance& inst) {
  const double n = inst.num_vars(), m = inst.num_rows();
  double nnz = 0.0;
  for (const auto& c : inst.constraints) nnz += static_cast<double>(c.row.size());
  const double density = n > 0 && m > 0 ? nnz / (n * m) : 0.0;
  const double int_frac = n > 0 ? inst.num_int() / n : 0.0;
  return {n, m, density, int_frac, static_cast<double>(recover_periods(inst).num_periods)};
}

Clustering cluster_instances(std::span<const MilpInstance> instances, int k, std::uint64_t seed) {
  Clustering res;
  const int n = static_cast<int>(instances.size());
  if (n == 0) return res;
  if (k < 1) throw std::invalid_argument("cluster_instances: k must be >= 1");
  k = std::min(k, n);
  std::vector<std::vector<double>> pts;
  for (const auto& inst : instances) pts.push_back(instance_summary(inst));
  const std::size_t d = pts[0].size();
  for (std::size_t f = 0; f < d; ++f) {
    double mean = 0.0, var = 0.0;
    for (const auto& p : pts) mean += p[f];
    mean /= n;
    for (const auto& p : pts) var += (p[f] - mean) * (p[f] - mean);
    const double sd = var > 0 ? std::sqrt(var / n) : 1.0;
    for (auto& p : pts) p[f] = (p[f] - mean) / sd;
  }
  auto dist2 = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t f = 0; f < d; ++f) s += (a[f] - b[f]) * (a[f] - b[f]);
    return s;
  };
  Rng rng(mix(seed, 404));
  res.centers.push_back(pts[static_cast<std::size_t>(rng.uniform_int(0, n - 1))]);
  while (static_cast<int>(res.centers.size()) < k) {
    std::vector<double> w(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : res.centers) best = std::min(best, dist2(pts[i], c));
      w[i] = best;
      total += best;
    }
    int pick = 0;
    if (total > 0) {
      double u = rng.uniform() * total;
      while (pick < n - 1 && u >= w[pick]) u -= w[pick++];
    } else {
      pick = static_cast<int>(res.centers.size());  // duplicates everywhere
    }
    res.centers.push_back(pts[pick]);
  }
  res.assignment.assign(n, 0);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = iter == 0;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      for (int c = 1; c < k; ++c)
        if (dist2(pts[i], res.centers[c]) < dist2(pts[i], res.centers[best])) best = c;
      if (best != res.assignment[i]) res.assignment[i] = best, changed = true;
    }
    if (!changed) break;
    for (int c = 0; c < k; ++c) {
      std::vector<double> sum(d, 0.0);
      int cnt = 0;
      for (int i = 0; i < n; ++i)
        if (res.assignment[i] == c) {
          ++cnt;
          for (std::size_t f = 0; f < d; ++f) sum[f] += pts[i][f];
        }
      if (cnt == 0) continue;  // an empty cluster keeps its center
      for (auto& v : sum) v /= cnt;
      res.centers[c] = sum;
    }
  }
  return res;
}

}  // namespace deskmip
