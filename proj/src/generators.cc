// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskmip/generators.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "deskmip/bnb.h"
#include "deskmip/heuristics.h"
#include "deskmip/lp.h"
#include "deskmip/rng.h"

namespace deskmip {

namespace {

constexpr int kMaxAttempts = 20;
constexpr int kPlantedOptimumMaxInts = 16;
// Simulated seconds allowed for proving the planted optimum; bounded so that
// generation stays cheap on instances whose relaxation is weak.
constexpr double kPlantedOptimumBudget = 0.5;

double round_to(double v, double step) { return std::round(v / step) * step; }

std::string name2(const char* p, int a, int b) {
  return std::string(p) + "_" + std::to_string(a) + "_" + std::to_string(b);
}

std::string name1(const char* p, int a) { return std::string(p) + "_" + std::to_string(a); }

void fail(const std::string& what) { throw GenerationError(what); }

void maybe_plant_optimum(const MilpInstance& inst, StructuredView& view) {
  if (inst.num_int() > kPlantedOptimumMaxInts) return;
  BnbConfig cfg;
  cfg.time_limit = kPlantedOptimumBudget;
  SimulatedClock clock;
  const BnbResult r = solve(inst, cfg, std::nullopt, &clock);
  if (r.status == BnbStatus::kOptimal && r.best) view.planted_optimum = r.best->objective;
}

}  // namespace

nlohmann::json to_json(const ItemPlacementParams& p) {
  return {{"items", p.items},       {"containers", p.containers},         {"dims", p.dims},
          {"alpha", p.alpha},       {"beta", p.beta},                     {"capacity", p.capacity},
          {"big_item_count", p.big_item_count}, {"big_item_scale", p.big_item_scale},
          {"seed", p.seed}};
}

nlohmann::json to_json(const WorkloadParams& p) {
  return {{"tasks", p.tasks},         {"machines", p.machines},     {"density", p.density},
          {"workloads", p.workloads}, {"capacities", p.capacities}, {"access", p.access},
          {"seed", p.seed}};
}

nlohmann::json to_json(const TimeIndexedParams& p) {
  return {{"horizon", p.horizon}, {"per_period", p.per_period}, {"window", p.window},
          {"upper", p.upper},     {"seed", p.seed}};
}

// Missing keys keep their defaults, so parameter files may be partial.
void from_json(const nlohmann::json& j, ItemPlacementParams& p) {
  p.items = j.value("items", p.items);
  p.containers = j.value("containers", p.containers);
  p.dims = j.value("dims", p.dims);
  p.alpha = j.value("alpha", p.alpha);
  p.beta = j.value("beta", p.beta);
  p.capacity = j.value("capacity", p.capacity);
  p.big_item_count = j.value("big_item_count", p.big_item_count);
  p.big_item_scale = j.value("big_item_scale", p.big_item_scale);
  p.seed = j.value("seed", p.seed);
}

void from_json(const nlohmann::json& j, WorkloadParams& p) {
  p.tasks = j.value("tasks", p.tasks);
  p.machines = j.value("machines", p.machines);
  p.density = j.value("density", p.density);
  p.workloads = j.value("workloads", p.workloads);
  p.capacities = j.value("capacities", p.capacities);
  p.access = j.value("access", p.access);
  p.seed = j.value("seed", p.seed);
}

void from_json(const nlohmann::json& j, TimeIndexedParams& p) {
  p.horizon = j.value("horizon", p.horizon);
  p.per_period = j.value("per_period", p.per_period);
  p.window = j.value("window", p.window);
  p.upper = j.value("upper", p.upper);
  p.seed = j.value("seed", p.seed);
}

Generated gen_item_placement(const ItemPlacementParams& p) {
  const int I = p.items, J = p.containers, K = p.dims, nb = p.big_item_count;
  if (I < 1 || J < 1 || K < 1) fail("item placement needs at least one item, container, dimension");
  if (nb < 0 || 2 * nb > J || nb > I) fail("big_item_count must satisfy 2 * count <= containers");
  if (!(p.big_item_scale > 1.0 && p.big_item_scale < 1.8)) fail("big_item_scale must lie in (1, 1.8)");
  for (const auto* v : {&p.alpha, &p.beta, &p.capacity}) {
    if (!v->empty() && static_cast<int>(v->size()) != K) fail("per-dimension vector has wrong size");
    for (double x : *v)
      if (!(x > 0)) fail("per-dimension weights and capacities must be positive");
  }

  Rng master(p.seed);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng = master.split();
    ItemPlacementData d;
    d.items = I;
    d.containers = J;
    d.dims = K;
    d.size.assign(I * K, 0.0);
    d.demand.assign(I * K, 0.0);

    std::vector<int> order(I);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    d.planted_big.assign(order.begin(), order.begin() + nb);
    std::sort(d.planted_big.begin(), d.planted_big.end());
    std::vector<bool> big(I, false);
    for (int i : d.planted_big) big[i] = true;

    for (int i = 0; i < I; ++i) {
      if (big[i]) continue;
      for (int k = 0; k < K; ++k) {
        d.size[i * K + k] = round_to(rng.uniform(1.0, 10.0), 0.01);
        d.demand[i * K + k] = d.size[i * K + k] * rng.uniform(0.8, 1.2);
      }
    }
    d.capacity.resize(K);
    for (int k = 0; k < K; ++k) {
      if (!p.capacity.empty()) {
        d.capacity[k] = p.capacity[k];
        continue;
      }
      double regular = 0.0;
      for (int i = 0; i < I; ++i) regular += d.a(i, k);
      d.capacity[k] = round_to(std::max(1.0, 1.3 * regular / (J - 0.6 * nb)), 0.01);
    }
    for (int i = 0; i < I; ++i) {
      for (int k = 0; k < K; ++k) {
        double& a = d.size[i * K + k];
        const double b = d.capacity[k];
        if (big[i])
          a = round_to(0.5 * b * p.big_item_scale * rng.uniform(1.0, 1.1), 0.01);
        else
          a = std::min(a, std::floor(0.45 * b * 100.0) / 100.0);
      }
    }
    // Demands: a big item covers 0.6 of a container's target; the regular
    // items share what is left of 0.95 per container.
    for (int k = 0; k < K; ++k) {
      double regular = 0.0;
      for (int i = 0; i < I; ++i)
        if (!big[i]) regular += d.demand[i * K + k];
      const double target = std::max(0.0, 0.95 * J - 0.6 * nb);
      for (int i = 0; i < I; ++i) {
        double& v = d.demand[i * K + k];
        v = big[i] ? 0.6 : (regular > 0 ? round_to(v * target / regular, 1e-4) : 0.0);
      }
    }
    d.alpha = p.alpha;
    d.beta = p.beta;
    for (int k = 0; k < K; ++k) {
      if (p.alpha.empty()) d.alpha.push_back(round_to(rng.uniform(1.0, 2.0), 0.01));
      if (p.beta.empty()) d.beta.push_back(round_to(rng.uniform(1.0, 2.0) * J / 2.0, 0.01));
    }

    bool fits = true;
    for (int k = 0; k < K; ++k) {
      double total = 0.0;
      for (int i = 0; i < I; ++i) total += d.a(i, k);
      if (total > J * d.capacity[k]) fits = false;
    }
    if (!fits) continue;

    MilpInstance inst;
    inst.name = "item_placement_s" + std::to_string(p.seed);
    StructuredView view;
    view.family = Family::kItemPlacement;
    for (int i = 0; i < I; ++i)
      for (int j = 0; j < J; ++j) {
        inst.add_var(0, 1, 0, true, name2("x", i, j));
        view.roles.push_back({"x", {i, j}});
      }
    for (int j = 0; j < J; ++j)
      for (int k = 0; k < K; ++k) {
        inst.add_var(0, kInf, d.alpha[k], false, name2("y", j, k));
        view.roles.push_back({"y", {j, k}});
      }
    for (int k = 0; k < K; ++k) {
      inst.add_var(0, kInf, d.beta[k], false, name1("z", k));
      view.roles.push_back({"z", {k}});
    }
    for (int i = 0; i < I; ++i) {
      SparseRow r;
      for (int j = 0; j < J; ++j) r.add(d.x(i, j), 1.0);
      inst.add_row(std::move(r), RowSense::kEq, 1.0, name1("asg", i));
    }
    for (int j = 0; j < J; ++j)
      for (int k = 0; k < K; ++k) {
        SparseRow r;
        for (int i = 0; i < I; ++i) r.add(d.x(i, j), d.a(i, k));
        inst.add_row(std::move(r), RowSense::kLe, d.capacity[k], name2("cap", j, k));
      }
    for (int j = 0; j < J; ++j)
      for (int k = 0; k < K; ++k) {
        SparseRow r;
        for (int i = 0; i < I; ++i)
          if (d.d(i, k) != 0.0) r.add(d.x(i, j), d.d(i, k));
        r.add(d.y(j, k), 1.0);
        inst.add_row(std::move(r), RowSense::kGe, 1.0, name2("dy", j, k));
      }
    for (int j = 0; j < J; ++j)
      for (int k = 0; k < K; ++k) {
        SparseRow r;
        r.add(d.y(j, k), 1.0);
        r.add(d.z(k), -1.0);
        inst.add_row(std::move(r), RowSense::kLe, 0.0, name2("dz", j, k));
      }
    view.item = std::move(d);
    view.params = to_json(p);
    const auto greedy = greedy_construct(inst, view, {});
    if (!greedy) continue;
    view.trivial_solution = greedy->values;
    view.trivial_bound = greedy->objective;
    maybe_plant_optimum(inst, view);
    return {std::move(inst), std::move(view)};
  }
  fail("item placement: no feasible draw in 20 attempts");
  return {};
}

Generated gen_workload(const WorkloadParams& p) {
  const int M = p.tasks, N = p.machines;
  if (M < 1 || N < 2) fail("workload needs at least one task and two machines");
  if (!(p.density > 0 && p.density <= 1)) fail("density must lie in (0, 1]");
  if (!p.workloads.empty() && static_cast<int>(p.workloads.size()) != M) fail("workloads size");
  if (!p.capacities.empty() && static_cast<int>(p.capacities.size()) != N) fail("capacities size");
  if (!p.access.empty() && static_cast<int>(p.access.size()) != M) fail("access size");

  Rng master(p.seed);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng = master.split();
    WorkloadData d;
    d.tasks = M;
    d.machines = N;
    d.workload = p.workloads;
    if (d.workload.empty())
      for (int i = 0; i < M; ++i) d.workload.push_back(round_to(rng.uniform(5.0, 20.0), 0.01));
    d.access = p.access;
    if (d.access.empty()) {
      const int per = std::max(2, static_cast<int>(std::lround(p.density * N)));
      for (int i = 0; i < M; ++i) {
        std::vector<int> all(N);
        std::iota(all.begin(), all.end(), 0);
        rng.shuffle(all);
        std::vector<int> acc(all.begin(), all.begin() + per);
        std::sort(acc.begin(), acc.end());
        d.access.push_back(std::move(acc));
      }
    }
    for (const auto& acc : d.access) {
      if (acc.size() < 2) fail("every task needs at least two accessible machines");
      std::set<int> uniq(acc.begin(), acc.end());
      if (uniq.size() != acc.size() || *uniq.begin() < 0 || *uniq.rbegin() >= N)
        fail("access lists must hold distinct machine indices");
    }
    const double total = std::accumulate(d.workload.begin(), d.workload.end(), 0.0);
    const double max_a = *std::max_element(d.workload.begin(), d.workload.end());
    d.capacity = p.capacities;
    if (d.capacity.empty())
      for (int j = 0; j < N; ++j)
        d.capacity.push_back(std::max(round_to(rng.uniform(0.8, 1.2) * 2.5 * total / N, 0.01),
                                      std::ceil(1.1 * max_a * 100.0) / 100.0));
    for (int i = 0; i < M; ++i)
      for (int j : d.access[i])
        if (!(d.workload[i] < d.capacity[j]))
          fail("workload " + std::to_string(i) + " does not fit machine " + std::to_string(j));

    MilpInstance inst;
    inst.name = "workload_s" + std::to_string(p.seed);
    StructuredView view;
    view.family = Family::kWorkload;
    for (int j = 0; j < N; ++j) {
      inst.add_var(0, 1, 1, true, name1("y", j));
      view.roles.push_back({"y", {j}});
    }
    d.x_var.resize(M);
    for (int i = 0; i < M; ++i)
      for (int j : d.access[i]) {
        d.x_var[i].push_back(inst.add_var(0, d.capacity[j], 0, false, name2("x", i, j)));
        view.roles.push_back({"x", {i, j}});
      }
    for (int i = 0; i < M; ++i)
      for (std::size_t t = 0; t < d.access[i].size(); ++t) {
        const int j = d.access[i][t];
        SparseRow r;
        r.add(d.y(j), -d.workload[i]);
        r.add(d.x_var[i][t], 1.0);
        d.define_x_rows.push_back(inst.add_row(std::move(r), RowSense::kLe, 0.0, name2("dx", i, j)));
      }
    for (int j = 0; j < N; ++j) {
      SparseRow r;
      for (int i = 0; i < M; ++i)
        for (std::size_t t = 0; t < d.access[i].size(); ++t)
          if (d.access[i][t] == j) r.add(d.x_var[i][t], 1.0);
      d.capacity_rows.push_back(
          inst.add_row(std::move(r), RowSense::kLe, d.capacity[j], name1("cap", j)));
    }
    for (int i = 0; i < M; ++i)
      for (std::size_t skip = 0; skip < d.access[i].size(); ++skip) {
        SparseRow r;
        for (std::size_t t = 0; t < d.access[i].size(); ++t)
          if (t != skip) r.add(d.x_var[i][t], 1.0);
        d.robust_rows.push_back(inst.add_row(std::move(r), RowSense::kGe, d.workload[i],
                                             name2("rob", i, d.access[i][skip])));
      }

    if (solve_lp(inst).status != LpStatus::kOptimal) continue;
    std::map<int, double> all_open;
    for (int j = 0; j < N; ++j) all_open[j] = 1.0;
    const LpResult completion = solve_lp(fix_variables(inst, all_open));
    if (completion.status != LpStatus::kOptimal) continue;

    view.work = std::move(d);
    view.params = to_json(p);
    view.trivial_solution = completion.x;
    for (int j = 0; j < N; ++j) view.trivial_solution[j] = 1.0;
    view.trivial_bound = inst.evaluate(view.trivial_solution);
    maybe_plant_optimum(inst, view);
    return {std::move(inst), std::move(view)};
  }
  fail("workload: no LP-feasible draw in 20 attempts");
  return {};
}

Generated gen_time_indexed(const TimeIndexedParams& p) {
  const int H = p.horizon, R = p.per_period, w = p.window;
  if (H < 1 || R < 1 || w < 1 || p.upper < 1) fail("time-indexed parameters must be positive");
  Rng rng(p.seed);
  MilpInstance inst;
  inst.name = "time_indexed_s" + std::to_string(p.seed);
  StructuredView view;
  view.family = Family::kTimeIndexed;
  TimeIndexedData d;
  d.horizon = H;
  d.per_period = R;
  d.window = w;
  const double U = p.upper;

  for (int h = 0; h < H; ++h)
    for (int r = 0; r < R; ++r) {
      inst.add_var(0, U, -static_cast<double>(rng.uniform_int(1, 10)), true, name2("x", h + 1, r));
      view.roles.push_back({"x", {h + 1, r}});
      d.period.push_back(h + 1);
    }
  std::vector<double> weight(H * R);
  for (auto& v : weight) v = static_cast<double>(rng.uniform_int(1, 5));
  std::vector<double> cap(H);
  for (int h = 0; h < H; ++h) {
    double sum = 0.0;
    for (int r = 0; r < R; ++r) sum += weight[h * R + r];
    cap[h] = std::floor(0.4 * U * sum);
    const double overtime_cost = static_cast<double>(rng.uniform_int(2, 4));
    inst.add_var(0, std::floor(0.25 * cap[h]), overtime_cost, false, name1("s", h + 1));
    view.roles.push_back({"s", {h + 1}});
    d.period.push_back(h + 1);
  }
  for (int h = 0; h < H; ++h) {
    SparseRow row;
    for (int r = 0; r < R; ++r) row.add(h * R + r, weight[h * R + r]);
    row.add(H * R + h, -1.0);
    inst.add_row(std::move(row), RowSense::kLe, cap[h], name1("cap", h + 1));
  }
  const int starts = std::max(1, H - w);
  for (int s = 0; s < starts; ++s) {
    SparseRow row;
    double sum = 0.0;
    for (int h = s; h <= std::min(H - 1, s + w); ++h)
      for (int r = 0; r < R; ++r) {
        const double u = static_cast<double>(rng.uniform_int(1, 4));
        row.add(h * R + r, u);
        sum += u;
      }
    inst.add_row(std::move(row), RowSense::kLe, std::floor(0.3 * U * sum), name1("win", s + 1));
  }
  view.time = std::move(d);
  view.params = to_json(p);
  view.trivial_solution = inst.lower;
  view.trivial_bound = inst.evaluate(view.trivial_solution);
  maybe_plant_optimum(inst, view);
  return {std::move(inst), std::move(view)};
}

void validate_structure(const MilpInstance& inst, const StructuredView& view) {
  if (static_cast<int>(view.roles.size()) != inst.num_vars()) fail("role map is not total");
  switch (view.family) {
    case Family::kItemPlacement: {
      const auto& d = view.item;
      const int I = d.items, J = d.containers, K = d.dims;
      if (inst.num_vars() != I * J + J * K + K) fail("item placement variable count");
      if (inst.num_rows() != I + 3 * J * K) fail("item placement row count");
      for (int i = 0; i < I; ++i) {
        const auto& c = inst.constraints[d.assignment_row(i)];
        if (c.sense != RowSense::kEq || c.rhs != 1.0 || static_cast<int>(c.row.size()) != J)
          fail("assignment row " + std::to_string(i));
        for (std::size_t t = 0; t < c.row.size(); ++t)
          if (c.row.index[t] != d.x(i, static_cast<int>(t)) || c.row.value[t] != 1.0)
            fail("assignment row " + std::to_string(i) + " pattern");
      }
      for (int i = 0; i < I; ++i)
        for (int j = 0; j < J; ++j)
          if (!inst.is_integer[d.x(i, j)]) fail("x variables must be binary");
      break;
    }
    case Family::kWorkload: {
      const auto& d = view.work;
      std::size_t expect = 0;
      for (const auto& acc : d.access) expect += acc.size();
      if (d.robust_rows.size() != expect) fail("robustness row count");
      if (d.define_x_rows.size() != expect) fail("define-x row count");
      for (int i = 0; i < d.tasks; ++i)
        for (int j : d.access[i])
          if (!(d.workload[i] < d.capacity[j])) fail("workload exceeds an accessible capacity");
      break;
    }
    case Family::kTimeIndexed: {
      const auto& d = view.time;
      for (const auto& c : inst.constraints) {
        int lo = d.horizon + 1, hi = 0;
        for (int j : c.row.index)
          if (inst.is_integer[j]) {
            lo = std::min(lo, d.period[j]);
            hi = std::max(hi, d.period[j]);
          }
        if (hi > 0 && hi - lo > d.window) fail("row spans more periods than the window");
      }
      if (!check_feasibility(inst, inst.lower, 1e-9).feasible) fail("lower-bound point infeasible");
      break;
    }
    case Family::kUnknown:
      break;
  }
}

RecoveredPeriods recover_periods(const MilpInstance& inst) {
  const int n = inst.num_vars();
  RecoveredPeriods out;
  out.period.assign(n, 0);
  std::vector<std::set<int>> closed(n);
  for (int j = 0; j < n; ++j)
    if (inst.is_integer[j]) closed[j].insert(j);
  for (const auto& c : inst.constraints) {
    std::vector<int> ints;
    for (int j : c.row.index)
      if (inst.is_integer[j]) ints.push_back(j);
    for (int a : ints) closed[a].insert(ints.begin(), ints.end());
  }

  // Collapse twins: identical closed neighbourhoods.
  std::map<std::set<int>, int> group_of_sig;
  std::vector<int> group(n, -1);
  std::vector<int> first_var;
  for (int j = 0; j < n; ++j) {
    if (!inst.is_integer[j]) continue;
    auto [it, inserted] = group_of_sig.emplace(closed[j], static_cast<int>(first_var.size()));
    if (inserted) first_var.push_back(j);
    group[j] = it->second;
  }
  const int G = static_cast<int>(first_var.size());
  if (G == 0) return out;
  std::vector<std::set<int>> gadj(G);
  for (int g = 0; g < G; ++g)
    for (int v : closed[first_var[g]])
      if (group[v] != g) gadj[g].insert(group[v]);

  auto bfs = [&](int src, const std::vector<int>& comp_of, int comp) {
    std::vector<int> dist(G, -1);
    std::deque<int> q{src};
    dist[src] = 0;
    while (!q.empty()) {
      const int g = q.front();
      q.pop_front();
      for (int h : gadj[g])
        if (dist[h] < 0 && comp_of[h] == comp) {
          dist[h] = dist[g] + 1;
          q.push_back(h);
        }
    }
    return dist;
  };

  std::vector<int> comp_of(G, -1);
  int comps = 0;
  for (int g = 0; g < G; ++g) {
    if (comp_of[g] >= 0) continue;
    std::deque<int> q{g};
    comp_of[g] = comps;
    while (!q.empty()) {
      const int a = q.front();
      q.pop_front();
      for (int b : gadj[a])
        if (comp_of[b] < 0) {
          comp_of[b] = comps;
          q.push_back(b);
        }
    }
    ++comps;
  }
  out.disconnected = comps > 1;

  std::vector<int> label(G, 0);
  for (int comp = 0; comp < comps; ++comp) {
    std::vector<int> members;
    for (int g = 0; g < G; ++g)
      if (comp_of[g] == comp) members.push_back(g);
    // Degree of a variable is the size of its open neighbourhood.
    int root = members.front();
    for (int g : members)
      if (closed[first_var[g]].size() < closed[first_var[root]].size()) root = g;
    const auto da = bfs(root, comp_of, comp);
    int far = root;
    for (int g : members)
      if (da[g] > da[far]) far = g;
    const auto db = bfs(far, comp_of, comp);
    std::vector<std::pair<int, int>> keys;
    for (int g : members) keys.emplace_back(da[g], -db[g]);
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    for (int g : members)
      label[g] = static_cast<int>(std::lower_bound(keys.begin(), keys.end(),
                                                   std::make_pair(da[g], -db[g])) -
                                  keys.begin()) +
                 1;
    out.num_periods = std::max(out.num_periods, static_cast<int>(keys.size()));
  }
  for (int j = 0; j < n; ++j)
    if (group[j] >= 0) out.period[j] = label[group[j]];
  return out;
}

}  // namespace deskmip
