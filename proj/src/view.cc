// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskmip/view.h"

#include <fstream>
#include <stdexcept>

namespace deskmip {

const char* to_string(Family f) {
  switch (f) {
    case Family::kItemPlacement:
      return "item_placement";
    case Family::kWorkload:
      return "workload";
    case Family::kTimeIndexed:
      return "time_indexed";
    case Family::kUnknown:
      return "unknown";
  }
  return "unknown";
}

Family family_from_string(const std::string& s) {
  if (s == "item_placement") return Family::kItemPlacement;
  if (s == "workload") return Family::kWorkload;
  if (s == "time_indexed") return Family::kTimeIndexed;
  if (s == "unknown") return Family::kUnknown;
  throw std::runtime_error("unknown family '" + s + "'");
}

nlohmann::json to_json(const StructuredView& v) {
  using nlohmann::json;
  json j;
  j["family"] = to_string(v.family);
  j["params"] = v.params;
  json roles = json::array();
  for (const auto& r : v.roles) {
    json e = json::array({r.name});
    for (int k : r.idx) e.push_back(k);
    roles.push_back(e);
  }
  j["roles"] = roles;
  j["trivial_bound"] = v.trivial_bound;
  j["trivial_solution"] = v.trivial_solution;
  j["planted_optimum"] = v.planted_optimum ? json(*v.planted_optimum) : json(nullptr);
  switch (v.family) {
    case Family::kItemPlacement: {
      const auto& d = v.item;
      j["data"] = {{"items", d.items},       {"containers", d.containers}, {"dims", d.dims},
                   {"size", d.size},         {"demand", d.demand},         {"capacity", d.capacity},
                   {"alpha", d.alpha},       {"beta", d.beta},             {"planted_big", d.planted_big}};
      break;
    }
    case Family::kWorkload: {
      const auto& d = v.work;
      j["data"] = {{"tasks", d.tasks},
                   {"machines", d.machines},
                   {"workload", d.workload},
                   {"capacity", d.capacity},
                   {"access", d.access},
                   {"x_var", d.x_var},
                   {"define_x_rows", d.define_x_rows},
                   {"capacity_rows", d.capacity_rows},
                   {"robust_rows", d.robust_rows}};
      break;
    }
    case Family::kTimeIndexed: {
      const auto& d = v.time;
      j["data"] = {{"horizon", d.horizon},
                   {"per_period", d.per_period},
                   {"window", d.window},
                   {"period", d.period}};
      break;
    }
    case Family::kUnknown:
      j["data"] = json::object();
      break;
  }
  return j;
}

StructuredView view_from_json(const nlohmann::json& j) {
  try {
    StructuredView v;
    v.family = family_from_string(j.at("family").get<std::string>());
    v.params = j.at("params");
    for (const auto& e : j.at("roles")) {
      Role r;
      r.name = e.at(0).get<std::string>();
      for (std::size_t k = 1; k < e.size(); ++k) r.idx.push_back(e.at(k).get<int>());
      v.roles.push_back(std::move(r));
    }
    v.trivial_bound = j.at("trivial_bound").get<double>();
    v.trivial_solution = j.at("trivial_solution").get<std::vector<double>>();
    if (!j.at("planted_optimum").is_null()) v.planted_optimum = j.at("planted_optimum").get<double>();
    const auto& d = j.at("data");
    switch (v.family) {
      case Family::kItemPlacement:
        d.at("items").get_to(v.item.items);
        d.at("containers").get_to(v.item.containers);
        d.at("dims").get_to(v.item.dims);
        d.at("size").get_to(v.item.size);
        d.at("demand").get_to(v.item.demand);
        d.at("capacity").get_to(v.item.capacity);
        d.at("alpha").get_to(v.item.alpha);
        d.at("beta").get_to(v.item.beta);
        d.at("planted_big").get_to(v.item.planted_big);
        break;
      case Family::kWorkload:
        d.at("tasks").get_to(v.work.tasks);
        d.at("machines").get_to(v.work.machines);
        d.at("workload").get_to(v.work.workload);
        d.at("capacity").get_to(v.work.capacity);
        d.at("access").get_to(v.work.access);
        d.at("x_var").get_to(v.work.x_var);
        d.at("define_x_rows").get_to(v.work.define_x_rows);
        d.at("capacity_rows").get_to(v.work.capacity_rows);
        d.at("robust_rows").get_to(v.work.robust_rows);
        break;
      case Family::kTimeIndexed:
        d.at("horizon").get_to(v.time.horizon);
        d.at("per_period").get_to(v.time.per_period);
        d.at("window").get_to(v.time.window);
        d.at("period").get_to(v.time.period);
        break;
      case Family::kUnknown:
        break;
    }
    return v;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed structure document: ") + e.what());
  }
}

void write_view_file(const StructuredView& v, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json(v).dump(1) << '\n';
}

StructuredView read_view_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return view_from_json(j);
}

}  // namespace deskmip
