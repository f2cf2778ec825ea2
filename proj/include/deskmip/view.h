// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

// Generator knowledge about an instance: which variable plays which role,
// the family data behind the coefficients, and the trivial starting point.
// Serialized next to the MPS file as <name>.structure.json.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace deskmip {

enum class Family { kItemPlacement, kWorkload, kTimeIndexed, kUnknown };

const char* to_string(Family f);
Family family_from_string(const std::string& s);

struct Role {
  std::string name;      // "x", "y", "z", "s"
  std::vector<int> idx;  // role indices, e.g. (i, j) for x
  friend bool operator==(const Role&, const Role&) = default;
};

// Items i, containers j, dimensions k.
// Variables: x(i,j) at i*J + j, then y(j,k), then z(k).
// Rows: assignment (i), knapsack (j,k), define-y (j,k), define-z (j,k).
struct ItemPlacementData {
  int items = 0;
  int containers = 0;
  int dims = 0;
  std::vector<double> size;    // a(i,k), row-major I x K
  std::vector<double> demand;  // d(i,k)
  std::vector<double> capacity;
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<int> planted_big;

  int x(int i, int j) const { return i * containers + j; }
  int y(int j, int k) const { return items * containers + j * dims + k; }
  int z(int k) const { return items * containers + containers * dims + k; }
  double a(int i, int k) const { return size[i * dims + k]; }
  double d(int i, int k) const { return demand[i * dims + k]; }
  int assignment_row(int i) const { return i; }
  int knapsack_row(int j, int k) const { return items + j * dims + k; }
  int define_y_row(int j, int k) const { return items + (containers + j) * dims + k; }
  int define_z_row(int j, int k) const { return items + (2 * containers + j) * dims + k; }
  friend bool operator==(const ItemPlacementData&, const ItemPlacementData&) = default;
};

// Tasks i, machines j. Variables: y(j) at j, then x(i,j) for j in access[i].
struct WorkloadData {
  int tasks = 0;
  int machines = 0;
  std::vector<double> workload;  // a_i
  std::vector<double> capacity;  // b_j
  std::vector<std::vector<int>> access;
  std::vector<std::vector<int>> x_var;  // aligned with access
  std::vector<int> define_x_rows;
  std::vector<int> capacity_rows;
  std::vector<int> robust_rows;

  int y(int j) const { return j; }
  friend bool operator==(const WorkloadData&, const WorkloadData&) = default;
};

struct TimeIndexedData {
  int horizon = 0;
  int per_period = 0;
  int window = 0;
  std::vector<int> period;  // 1-based per variable
  friend bool operator==(const TimeIndexedData&, const TimeIndexedData&) = default;
};

struct StructuredView {
  Family family = Family::kUnknown;
  std::vector<Role> roles;  // one per variable
  ItemPlacementData item;
  WorkloadData work;
  TimeIndexedData time;
  nlohmann::json params = nlohmann::json::object();
  double trivial_bound = 0.0;
  std::vector<double> trivial_solution;
  std::optional<double> planted_optimum;

  friend bool operator==(const StructuredView&, const StructuredView&) = default;
};

nlohmann::json to_json(const StructuredView& v);
// Throws std::runtime_error on a malformed document.
StructuredView view_from_json(const nlohmann::json& j);

void write_view_file(const StructuredView& v, const std::string& path);
StructuredView read_view_file(const std::string& path);

}  // namespace deskmip
