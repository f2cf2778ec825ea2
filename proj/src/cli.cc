// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskmip/cli.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <tuple>

#include "CLI11.hpp"
#include "deskmip/bnb.h"
#include "deskmip/heuristics.h"
#include "deskmip/learner.h"
#include "deskmip/metrics.h"
#include "deskmip/mps.h"
#include "deskmip/parallel.h"
#include "deskmip/runlog.h"
#include "deskmip/tuner.h"
#include "deskmip/view.h"

namespace deskmip {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Whole-command failure; maps to kExitFatal.
class Fatal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string strip_suffix(const std::string& s, const std::string& suffix) {
  if (s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0)
    return s.substr(0, s.size() - suffix.size());
  return s;
}

// A directory stands for the .mps files inside it.
std::vector<std::string> expand(const std::string& pattern, const char* what = "*.mps") {
  std::vector<std::string> paths = fs::is_directory(pattern)
                                       ? glob_paths((fs::path(pattern) / what).string())
                                       : glob_paths(pattern);
  if (paths.empty()) throw Fatal("no files match '" + pattern + "'");
  return paths;
}

std::vector<Generated> load_all(const std::vector<std::string>& paths) {
  std::vector<Generated> out;
  out.reserve(paths.size());
  for (const auto& p : paths) {
    try {
      out.push_back(load_instance(p));
    } catch (const std::exception& e) {
      throw Fatal(p + ": " + e.what());
    }
  }
  return out;
}

std::vector<MilpInstance> models_of(const std::vector<Generated>& gs) {
  std::vector<MilpInstance> out;
  out.reserve(gs.size());
  for (const auto& g : gs) out.push_back(g.inst);
  return out;
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw Fatal("cannot create directory " + p.string());
}

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// Inline JSON, or the path of a JSON file.
json read_json_arg(const std::string& arg) {
  const std::string text = fs::is_regular_file(arg) ? read_text_file(arg) : arg;
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Fatal("invalid JSON in '" + arg + "': " + e.what());
  }
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string family;
  int count = 10;
  std::uint64_t seed = 0;
  std::string params;
  std::string out;
  double valid_ratio = 0.1;
};

template <class P>
P params_from(const json& j) {
  const json known = to_json(P{});
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw Fatal("unknown generator parameter '" + key + "'");
  P p;
  try {
    from_json(j, p);
  } catch (const json::exception& e) {
    throw Fatal(std::string("invalid generator parameters: ") + e.what());
  }
  return p;
}

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  Family fam;
  try {
    fam = family_from_string(a.family);
  } catch (const std::exception& e) {
    throw Fatal(e.what());
  }
  if (fam == Family::kUnknown) throw Fatal("cannot generate the unknown family");
  if (a.count < 1) throw Fatal("--count must be positive");
  if (!(a.valid_ratio >= 0 && a.valid_ratio < 1)) throw Fatal("--valid-ratio must lie in [0, 1)");
  const json pj = a.params.empty() ? json::object() : read_json_arg(a.params);
  if (!pj.is_object()) throw Fatal("--params must be a JSON object");
  ensure_dir(a.out);

  const int valid = static_cast<int>(std::lround(a.count * a.valid_ratio));
  json manifest = {{"family", a.family},
                   {"seed", a.seed},
                   {"count", a.count},
                   {"valid_ratio", a.valid_ratio},
                   {"params", pj},
                   {"train", json::array()},
                   {"valid", json::array()}};
  for (int i = 0; i < a.count; ++i) {
    const std::uint64_t seed = a.seed + static_cast<std::uint64_t>(i);
    Generated g;
    try {
      switch (fam) {
        case Family::kItemPlacement: {
          auto p = params_from<ItemPlacementParams>(pj);
          p.seed = seed;
          g = gen_item_placement(p);
          break;
        }
        case Family::kWorkload: {
          auto p = params_from<WorkloadParams>(pj);
          p.seed = seed;
          g = gen_workload(p);
          break;
        }
        default: {
          auto p = params_from<TimeIndexedParams>(pj);
          p.seed = seed;
          g = gen_time_indexed(p);
          break;
        }
      }
    } catch (const GenerationError& e) {
      throw Fatal(e.what());
    }
    char stem[96];
    std::snprintf(stem, sizeof stem, "%s-%04d", a.family.c_str(), i);
    g.inst.name = stem;
    const fs::path base = fs::path(a.out) / stem;
    write_mps_file(g.inst, base.string() + ".mps");
    write_view_file(g.view, base.string() + ".structure.json");
    manifest[i < a.count - valid ? "train" : "valid"].push_back(std::string(stem) + ".mps");
  }
  write_text_file((fs::path(a.out) / "manifest.json").string(), manifest.dump(2) + "\n");
  out << "generated " << a.count << " " << a.family << " instances (" << a.count - valid
      << " train, " << valid << " valid) in " << a.out << "\n";
  return kExitOk;
}

// --------------------------------------------------------- primal and dual

struct RunOutcome {
  std::vector<std::string> row;
  std::string error;
};

std::string log_name(const std::string& instance, const char* kind) {
  return "logs/" + instance + "." + kind + ".json";
}

int finish_runs(const std::vector<std::string>& header, std::vector<RunOutcome>& runs,
                const fs::path& out_dir, const char* csv_name, std::ostream& out,
                std::ostream& err) {
  CsvTable t;
  t.header = header;
  int failures = 0;
  for (auto& r : runs) {
    if (!r.error.empty()) {
      ++failures;
      err << "error: " << r.error << "\n";
    }
    t.rows.push_back(std::move(r.row));
  }
  const fs::path csv = out_dir / csv_name;
  write_text_file(csv.string(), t.to_string());
  out << "wrote " << t.rows.size() << " rows to " << csv.string();
  if (failures) out << " (" << failures << " failed)";
  out << "\n";
  return failures ? kExitPartial : kExitOk;
}

struct PrimalArgs {
  std::string instances;
  double budget = 10.0;
  double submip_seconds = 2.0;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 1;
  bool wall_clock = false;
};

const std::vector<std::string> kPrimalHeader = {
    "instance", "family",    "status",         "trivial_bound", "final_primal",
    "reference", "reference_kind", "primal_integral", "log"};

int cmd_primal(const PrimalArgs& a, std::ostream& out, std::ostream& err) {
  if (!(a.budget > 0) || !(a.submip_seconds > 0)) throw Fatal("budgets must be positive");
  const auto paths = expand(a.instances);
  const fs::path dir(a.out);
  ensure_dir(dir / "logs");
  const json config = {{"command", "primal"},
                       {"budget", a.budget},
                       {"submip_seconds", a.submip_seconds},
                       {"seed", a.seed}};
  std::vector<RunOutcome> runs(paths.size());
  parallel_for(static_cast<int>(paths.size()), a.threads, [&](int i) {
    const std::string name = strip_suffix(fs::path(paths[i]).filename().string(), ".mps");
    RunOutcome& r = runs[i];
    r.row.assign(kPrimalHeader.size(), "");
    r.row[0] = name;
    try {
      const Generated g = load_instance(paths[i]);
      r.row[1] = to_string(g.view.family);
      std::unique_ptr<Clock> clock;
      if (a.wall_clock) clock = std::make_unique<WallClock>();
      else clock = std::make_unique<SimulatedClock>();
      HeuristicBudget budget;
      budget.wall_seconds = a.budget;
      budget.submip_seconds = a.submip_seconds;
      HeuristicParams hp;
      hp.seed = a.seed;
      const auto res = primal_pipeline(g.inst, g.view, budget, *clock, hp);

      RunLog log;
      log.instance = name;
      log.family = r.row[1];
      log.seed = a.seed;
      log.config = config;
      log.clock = a.wall_clock ? "wall" : "simulated";
      log.timeline = res.timeline;
      log.status = res.best ? "feasible" : "no_solution";
      write_runlog(log, (dir / log_name(name, "primal")).string());

      r.row[2] = log.status;
      if (g.view.family != Family::kUnknown) r.row[3] = format_double(g.view.trivial_bound);
      r.row[4] = format_double(log.timeline.final_primal());
      std::optional<double> ref = g.view.planted_optimum;
      r.row[6] = ref ? "planted" : "best_found";
      if (!ref) ref = log.timeline.final_primal();
      r.row[5] = format_double(ref);
      if (ref && log.timeline.initial_primal)
        r.row[7] = format_double(primal_integral(log.timeline, *ref));
      r.row[8] = log_name(name, "primal");
    } catch (const std::exception& e) {
      r.row[2] = "error";
      r.error = name + ": " + e.what();
    }
  });
  return finish_runs(kPrimalHeader, runs, dir, "primal.csv", out, err);
}

struct DualArgs {
  std::string instances;
  std::string rule = "strong";
  std::string model;
  double budget = 20.0;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 1;
};

const std::map<std::string, BranchingRule> kRules = {
    {"most_fractional", BranchingRule::kMostFractional},
    {"random", BranchingRule::kRandom},
    {"strong", BranchingRule::kStrongBranching},
    {"pseudocost", BranchingRule::kPseudoCost},
};

const std::vector<std::string> kDualHeader = {
    "instance",       "family",         "rule",         "status",
    "nodes",          "final_dual",     "final_primal", "reference",
    "reference_kind", "dual_integral",  "cumulated_reward", "log"};

int cmd_dual(const DualArgs& a, std::ostream& out, std::ostream& err) {
  if (!(a.budget > 0)) throw Fatal("--budget must be positive");
  BnbConfig cfg;
  cfg.time_limit = a.budget;
  cfg.random_seed = a.seed;
  cfg.primal_heuristics_enabled = false;
  json config = {{"command", "dual"},
                 {"budget", a.budget},
                 {"seed", a.seed},
                 {"primal_heuristics", "off"}};
  std::string rule_name = a.rule;
  if (!a.model.empty()) {
    json mj;
    try {
      mj = json::parse(read_text_file(a.model));
      cfg.scorer = model_from_json(mj);
    } catch (const std::exception& e) {
      throw Fatal(a.model + ": " + e.what());
    }
    cfg.branching_rule = BranchingRule::kLearned;
    rule_name = "learned";
    config["model_hash"] = config_hash(mj);
  } else {
    auto it = kRules.find(a.rule);
    if (it == kRules.end()) throw Fatal("unknown rule '" + a.rule + "'");
    cfg.branching_rule = it->second;
  }
  config["rule"] = rule_name;
  cfg.validate();

  const auto paths = expand(a.instances);
  const fs::path dir(a.out);
  ensure_dir(dir / "logs");
  std::vector<RunOutcome> runs(paths.size());
  parallel_for(static_cast<int>(paths.size()), a.threads, [&](int i) {
    const std::string name = strip_suffix(fs::path(paths[i]).filename().string(), ".mps");
    RunOutcome& r = runs[i];
    r.row.assign(kDualHeader.size(), "");
    r.row[0] = name;
    r.row[2] = rule_name;
    try {
      const Generated g = load_instance(paths[i]);
      r.row[1] = to_string(g.view.family);
      SimulatedClock clock;
      const auto res = solve(g.inst, cfg, std::nullopt, &clock);

      RunLog log;
      log.instance = name;
      log.family = r.row[1];
      log.seed = a.seed;
      log.config = config;
      log.timeline = res.timeline;
      log.status = to_string(res.status);
      log.nodes = res.nodes;
      write_runlog(log, (dir / log_name(name, "dual")).string());

      r.row[3] = log.status;
      r.row[4] = std::to_string(res.nodes);
      r.row[5] = format_double(log.timeline.final_dual());
      r.row[6] = format_double(log.timeline.final_primal());
      std::optional<double> ref = g.view.planted_optimum;
      r.row[8] = "planted";
      if (!ref) {
        ref = log.timeline.final_primal();
        r.row[8] = "best_found";
      }
      if (!ref) {
        ref = log.timeline.final_dual();
        r.row[8] = "final_dual";
      }
      r.row[7] = format_double(ref);
      if (ref && log.timeline.initial_dual) {
        r.row[9] = format_double(dual_integral(log.timeline, *ref));
        r.row[10] = format_double(cumulated_reward(log.timeline));
      }
      r.row[11] = log_name(name, "dual");
    } catch (const std::exception& e) {
      r.row[3] = "error";
      r.error = name + ": " + e.what();
    }
  });
  return finish_runs(kDualHeader, runs, dir, "dual.csv", out, err);
}

// --------------------------------------------------------- train-branching

struct TrainArgs {
  std::string train;
  std::string valid;
  int rounds = 3;
  int omega_max = 3;
  long node_cap = 50;
  double collect_seconds = 10.0;
  double budget = 10.0;
  std::string out;
  int threads = 1;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  if (a.rounds < 1) throw Fatal("--rounds must be positive");
  if (a.omega_max < 1 || a.omega_max > a.rounds)
    throw Fatal("--omega-max must lie in [1, rounds]");
  const auto train = load_all(expand(a.train));
  const auto valid = load_all(expand(a.valid));
  const auto train_m = models_of(train);
  const auto valid_m = models_of(valid);
  const fs::path dir(a.out);
  ensure_dir(dir);

  DaggerOptions d;
  d.rounds = a.rounds;
  d.collect.node_cap = a.node_cap;
  d.collect.time_limit = a.collect_seconds;
  const DaggerResult dr = dagger_loop(train_m, d);
  if (dr.dataset.size() == 0) throw Fatal("no branching samples were collected");

  CrOptions cr;
  cr.time_limit = a.budget;
  const auto search = greedy_omega_search(
      dr.candidates,
      [&](const ScorerParams& p) { return mean_cumulated_reward(p, valid_m, cr); }, a.omega_max,
      a.threads);

  json table = json::array();
  out << "omega  cr_validation\n";
  for (const auto& e : search.table) {
    table.push_back({{"omega", e.omega},
                     {"cr", e.cr},
                     {"selected", e.omega == search.best_omega},
                     {"model", model_to_json(e.params)}});
    out << (e.omega == search.best_omega ? "*" : " ") << e.omega << "      " << fixed(e.cr, 6)
        << "\n";
  }
  const double top1 = topk_accuracy(dr.dataset, search.best, 1);
  const double top3 = topk_accuracy(dr.dataset, search.best, 3);
  const double base = uniform_top1_baseline(dr.dataset);
  const json report = {{"rounds", a.rounds},
                       {"omega_max", a.omega_max},
                       {"train_instances", train.size()},
                       {"valid_instances", valid.size()},
                       {"dataset_sizes", dr.dataset_sizes},
                       {"table", table},
                       {"selected_omega", search.best_omega},
                       {"selected_cr", search.best_cr},
                       {"train_top1", top1},
                       {"train_top3", top3},
                       {"uniform_top1", base}};
  write_text_file((dir / "report.json").string(), report.dump(2) + "\n");
  const json meta = {{"omega", search.best_omega}, {"cr_validation", search.best_cr},
                     {"rounds", a.rounds}};
  write_text_file((dir / "model.json").string(), model_to_json(search.best, meta).dump(2) + "\n");
  write_text_file((dir / "dataset.jsonl").string(), dataset_to_jsonl(dr.dataset));
  out << "selected omega " << search.best_omega << "; train top-1 " << fixed(top1, 4)
      << " (uniform " << fixed(base, 4) << "), top-3 " << fixed(top3, 4) << "\n";
  return kExitOk;
}

// -------------------------------------------------------------------- tune

struct TuneArgs {
  std::string instances;
  int k = 0;
  int iterations = 2;
  int batch = 1;
  int init = 4;
  std::uint64_t seed = 0;
  double budget = 30.0;
  int probes = 64;
  int keep = 12;
  int probe_instances = 0;
  std::string allow;
  int clusters = 0;
  std::string out;
  int threads = 1;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size() && !s.empty()) {
    const std::size_t comma = s.find(',', start);
    const std::size_t len = comma == std::string::npos ? std::string::npos : comma - start;
    std::string item = s.substr(start, len);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

int cmd_tune(const TuneArgs& a, std::ostream& out) {
  if (!(a.budget > 0)) throw Fatal("--budget must be positive");
  const auto paths = expand(a.instances);
  const auto all = load_all(paths);
  const fs::path dir(a.out);
  ensure_dir(dir);

  // Groups of instance indices tuned separately.
  std::vector<std::vector<int>> groups;
  json clusters_doc;
  if (a.clusters > 1) {
    const auto cl = cluster_instances(models_of(all), a.clusters, a.seed);
    const int k = static_cast<int>(cl.centers.size());
    groups.resize(k);
    clusters_doc = json::object();
    for (int i = 0; i < static_cast<int>(all.size()); ++i) {
      groups[cl.assignment[i]].push_back(i);
      clusters_doc[all[i].inst.name] = cl.assignment[i];
    }
    write_text_file((dir / "clusters.json").string(), clusters_doc.dump(2) + "\n");
  } else {
    groups.emplace_back();
    for (int i = 0; i < static_cast<int>(all.size()); ++i) groups[0].push_back(i);
  }

  EvalOptions eo;
  eo.budget = a.budget;
  eo.threads = a.threads;
  for (int c = 0; c < static_cast<int>(groups.size()); ++c) {
    if (groups[c].empty()) continue;
    std::vector<Generated> insts;
    for (int i : groups[c]) insts.push_back(all[i]);
    const int np = a.probe_instances > 0
                       ? std::min<int>(a.probe_instances, static_cast<int>(insts.size()))
                       : static_cast<int>(insts.size());
    const std::span<const Generated> probe_set(insts.data(), np);
    const ConfigEvaluator full = [&](const Config& cf) {
      return evaluate_config(cf, insts, eo).mean;
    };
    const ConfigEvaluator probe = [&](const Config& cf) {
      return evaluate_config(cf, probe_set, eo).mean;
    };
    const std::uint64_t seed = a.seed + static_cast<std::uint64_t>(c);

    ParamSpace space = default_space();
    json reduction = {{"probes", a.probes}};
    if (a.probes > 0) {
      ReduceOptions ro;
      ro.allowlist = split_list(a.allow);
      ro.probes = a.probes;
      ro.keep = a.keep;
      ro.min_successes = std::min(ro.min_successes, a.probes);
      ro.seed = seed;
      const auto red = reduce_space(space, probe, ro);
      space = red.space;
      json ranking = json::array();
      for (const auto& [name, imp] : red.ranking) ranking.push_back({name, imp});
      json frozen = json::array();
      for (const auto& p : space.params)
        if (p.frozen) frozen.push_back(p.name);
      reduction["ranking"] = ranking;
      reduction["frozen"] = frozen;
      reduction["successes"] = red.successes;
      reduction["aborted"] = red.aborted;
    }
    TuneOptions to;
    to.k = a.k;
    to.init_samples = a.init;
    to.iterations = a.iterations;
    to.batch = a.batch;
    to.seed = seed;
    TunerResult res;
    try {
      res = tune(space, full, to);
    } catch (const std::invalid_argument& e) {
      throw Fatal(e.what());
    }

    const std::string suffix = groups.size() > 1 ? "-c" + std::to_string(c + 1) : "";
    write_text_file((dir / ("config" + suffix + ".json")).string(), res.best.dump(2) + "\n");
    write_text_file((dir / ("history" + suffix + ".jsonl")).string(), history_to_jsonl(res));
    write_text_file((dir / ("reduction" + suffix + ".json")).string(), reduction.dump(2) + "\n");

    if (groups.size() > 1)
      out << "[c" << c + 1 << "] " << insts.size() << " instances\n";
    out << "Default Performance: " << fixed(res.default_objective, 4) << "\n";
    out << "Tuned Performance: " << fixed(res.best_objective, 4) << "\n";
    const double factor = res.best_objective > 0 ? res.default_objective / res.best_objective
                                                 : (res.default_objective > 0 ? INFINITY : 1.0);
    out << "Improvement: x" << fixed(factor, 2) << "\n";
  }
  return kExitOk;
}

// ------------------------------------------------------------------ report

struct ReportArgs {
  std::string csv;
  std::string out;
};

const std::vector<std::string> kNonMetrics = {"instance", "family", "rule", "status",
                                              "reference_kind", "log", "reference"};

bool same_value(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a));
}

void write_series(const BoundsTimeline& tl, const fs::path& path) {
  CsvTable t;
  t.header = {"t", "primal", "dual"};
  std::optional<double> pb = tl.initial_primal, db = tl.initial_dual;
  t.rows.push_back({"0", format_double(pb), format_double(db)});
  for (const auto& e : tl.events) {
    if (e.kind == EventKind::kPrimalUpdate) pb = e.value;
    else if (e.kind == EventKind::kDualUpdate) db = e.value;
    else continue;
    t.rows.push_back({format_double(e.t), format_double(pb), format_double(db)});
  }
  t.rows.push_back({format_double(tl.horizon), format_double(pb), format_double(db)});
  write_text_file(path.string(), t.to_string());
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
  const auto paths = expand(a.csv, "*.csv");
  const fs::path dir(a.out);
  ensure_dir(dir / "series");

  // (source, family, metric) -> values, in first-seen order.
  std::vector<std::tuple<std::string, std::string, std::string>> keys;
  std::map<std::tuple<std::string, std::string, std::string>, std::vector<double>> values;
  int checked = 0, mismatches = 0;
  for (std::size_t ci = 0; ci < paths.size(); ++ci) {
    const std::string& path = paths[ci];
    CsvTable t;
    try {
      t = parse_csv(read_text_file(path));
    } catch (const std::exception& e) {
      throw Fatal(path + ": " + e.what());
    }
    const int inst_col = t.column("instance");
    const int fam_col = t.column("family");
    const int log_col = t.column("log");
    const int ref_col = t.column("reference");
    for (std::size_t c = 0; c < t.header.size(); ++c) {
      const std::string& metric = t.header[c];
      if (std::find(kNonMetrics.begin(), kNonMetrics.end(), metric) != kNonMetrics.end())
        continue;
      for (const auto& row : t.rows) {
        if (row[c].empty()) continue;
        const auto v = parse_number(row[c]);
        if (!v) throw Fatal(path + ": non-numeric value '" + row[c] + "' in column " + metric);
        const auto key = std::make_tuple(path, fam_col >= 0 ? row[fam_col] : "all", metric);
        auto [it, fresh] = values.try_emplace(key);
        if (fresh) keys.push_back(key);
        it->second.push_back(*v);
      }
    }
    if (log_col < 0) continue;
    const fs::path base = fs::path(path).parent_path();
    const std::string source = std::to_string(ci) + "-" + fs::path(path).stem().string();
    for (const auto& row : t.rows) {
      if (row[log_col].empty()) continue;
      const RunLog log = read_runlog((base / row[log_col]).string());
      const std::string inst = inst_col >= 0 ? row[inst_col] : log.instance;
      write_series(log.timeline, dir / "series" / (source + "-" + inst + ".csv"));
      // Recompute every logged metric the row reports.
      const auto ref = ref_col >= 0 ? parse_number(row[ref_col]) : std::nullopt;
      auto check = [&](const char* col, const std::function<double()>& recompute) {
        const int c = t.column(col);
        if (c < 0 || row[c].empty()) return;
        ++checked;
        const double v = recompute();
        if (!same_value(*parse_number(row[c]), v)) {
          ++mismatches;
          err << "cross-check: " << path << " " << inst << " " << col << " reports " << row[c]
              << " but the log gives " << format_double(v) << "\n";
        }
      };
      if (ref) {
        check("primal_integral", [&] { return primal_integral(log.timeline, *ref); });
        check("dual_integral", [&] { return dual_integral(log.timeline, *ref); });
      }
      check("cumulated_reward", [&] { return cumulated_reward(log.timeline); });
      check("final_primal", [&] { return log.timeline.final_primal().value_or(NAN); });
      check("final_dual", [&] { return log.timeline.final_dual().value_or(NAN); });
    }
  }

  CsvTable summary;
  summary.header = {"source", "family", "metric", "count", "mean", "median", "std"};
  for (const auto& key : keys) {
    const auto& v = values[key];
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    summary.rows.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key),
                            std::to_string(v.size()), format_double(mean),
                            format_double(median_of(v)), format_double(sd)});
  }
  write_text_file((dir / "summary.csv").string(), summary.to_string());
  out << "summarized " << paths.size() << " csv files into " << (dir / "summary.csv").string()
      << "; cross-checked " << checked << " values, " << mismatches << " mismatches\n";
  return mismatches ? kExitPartial : kExitOk;
}

}  // namespace

Generated load_instance(const std::string& mps_path) {
  Generated g;
  g.inst = read_mps_file(mps_path);
  g.inst.name = strip_suffix(fs::path(mps_path).filename().string(), ".mps");
  const std::string sidecar = strip_suffix(mps_path, ".mps") + ".structure.json";
  if (fs::exists(sidecar)) g.view = read_view_file(sidecar);
  return g;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"deskmip: MILP corpora, heuristics, branching and configuration at desk scale"};
  app.name("deskmip");
  app.require_subcommand(1);

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "write a seeded instance corpus");
  gen->add_option("--family", ga.family, "item_placement, workload or time_indexed")->required();
  gen->add_option("--count", ga.count, "number of instances");
  gen->add_option("--seed", ga.seed, "seed of the first instance; instance i uses seed + i");
  gen->add_option("--params", ga.params, "generator parameters: JSON object or file");
  gen->add_option("--out", ga.out, "output directory")->required();
  gen->add_option("--valid-ratio", ga.valid_ratio, "fraction held out as validation");

  PrimalArgs pa;
  auto* pri = app.add_subcommand("primal", "run the primal heuristic pipeline");
  pri->add_option("--instances", pa.instances, "glob or directory of .mps files")->required();
  pri->add_option("--budget", pa.budget, "seconds per instance");
  pri->add_option("--submip-seconds", pa.submip_seconds, "seconds per sub-MIP");
  pri->add_option("--seed", pa.seed, "heuristic seed");
  pri->add_option("--out", pa.out, "output directory")->required();
  pri->add_option("--threads", pa.threads, "parallel instances");
  pri->add_flag("--wall-clock", pa.wall_clock, "measure real time instead of simulated work");

  DualArgs da;
  auto* dua = app.add_subcommand("dual", "run branch-and-bound with heuristics disabled");
  dua->add_option("--instances", da.instances, "glob or directory of .mps files")->required();
  auto* rule_opt = dua->add_option("--rule", da.rule,
                                   "most_fractional, random, strong or pseudocost");
  dua->add_option("--model", da.model, "learned branching model file")->excludes(rule_opt);
  dua->add_option("--budget", da.budget, "simulated seconds per instance");
  dua->add_option("--seed", da.seed, "seed of the random rule");
  dua->add_option("--out", da.out, "output directory")->required();
  dua->add_option("--threads", da.threads, "parallel instances");

  TrainArgs ta;
  auto* tra = app.add_subcommand("train-branching", "imitate strong branching");
  tra->add_option("--train", ta.train, "training instances")->required();
  tra->add_option("--valid", ta.valid, "validation instances")->required();
  tra->add_option("--rounds", ta.rounds, "imitation rounds");
  tra->add_option("--omega-max", ta.omega_max, "largest number of averaged models");
  tra->add_option("--node-cap", ta.node_cap, "labeled nodes per instance and round");
  tra->add_option("--collect-seconds", ta.collect_seconds, "collection time per instance");
  tra->add_option("--budget", ta.budget, "validation seconds per instance");
  tra->add_option("--out", ta.out, "output directory")->required();
  tra->add_option("--threads", ta.threads, "parallel validation runs");

  TuneArgs ua;
  auto* tun = app.add_subcommand("tune", "tune solver parameters for the mean gap integral");
  tun->add_option("--instances", ua.instances, "glob or directory of .mps files")->required();
  tun->add_option("--k", ua.k, "0: four sub-spaces; 1: one merged space");
  tun->add_option("--N", ua.iterations, "iterations per sub-space");
  tun->add_option("--q", ua.batch, "batch size");
  tun->add_option("--init", ua.init, "initial random samples per sub-space");
  tun->add_option("--seed", ua.seed, "tuner seed");
  tun->add_option("--budget", ua.budget, "simulated seconds per evaluation run");
  tun->add_option("--probes", ua.probes, "space reduction probes; 0 skips the reduction");
  tun->add_option("--keep", ua.keep, "parameters kept by the reduction");
  tun->add_option("--probe-instances", ua.probe_instances, "instances used by the probes");
  tun->add_option("--allow", ua.allow, "comma-separated parameter allowlist");
  tun->add_option("--clusters", ua.clusters, "tune one config per k-means cluster");
  tun->add_option("--out", ua.out, "output directory")->required();
  tun->add_option("--threads", ua.threads, "parallel instances per evaluation");

  ReportArgs ra;
  auto* rep = app.add_subcommand("report", "summarize CSVs and cross-check their logs");
  rep->add_option("--csv", ra.csv, "glob or directory of CSV files")->required();
  rep->add_option("--out", ra.out, "output directory")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitFatal;
  }

  try {
    if (*gen) return cmd_generate(ga, out);
    if (*pri) return cmd_primal(pa, out, err);
    if (*dua) return cmd_dual(da, out, err);
    if (*tra) return cmd_train(ta, out);
    if (*tun) return cmd_tune(ua, out);
    if (*rep) return cmd_report(ra, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitFatal;
}

}  // namespace deskmip
