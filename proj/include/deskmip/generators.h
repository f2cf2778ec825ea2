// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

// Seeded instance generators for the three benchmark families.
//
// Item placement: balanced placement of items into containers with knapsack
// capacities and an unevenness penalty; a few planted big items exceed half
// of a container's capacity so no two of them can share one.
// Workload: machines carry fractions of task workloads so that the loss of
// any single accessible machine leaves each task fully served.
// Time-indexed: integer activity levels per period with per-period capacity
// rows (overtime allowed at a cost) and resource rows over sliding windows.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "deskmip/model.h"
#include "deskmip/view.h"

namespace deskmip {

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ItemPlacementParams {
  int items = 105;
  int containers = 10;
  int dims = 2;
  std::vector<double> alpha;     // empty: drawn from the seed
  std::vector<double> beta;      // empty: drawn from the seed
  std::vector<double> capacity;  // empty: sized from the drawn items
  int big_item_count = 5;
  double big_item_scale = 1.2;  // big sizes are scale * b_k / 2 * u, u in [1, 1.1]
  std::uint64_t seed = 0;
};

struct WorkloadParams {
  int tasks = 30;
  int machines = 12;
  double density = 0.5;
  std::vector<double> workloads;          // empty: drawn
  std::vector<double> capacities;         // empty: drawn
  std::vector<std::vector<int>> access;   // empty: drawn
  std::uint64_t seed = 0;
};

struct TimeIndexedParams {
  int horizon = 8;
  int per_period = 6;
  int window = 1;
  int upper = 3;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const ItemPlacementParams& p);
nlohmann::json to_json(const WorkloadParams& p);
nlohmann::json to_json(const TimeIndexedParams& p);
void from_json(const nlohmann::json& j, ItemPlacementParams& p);
void from_json(const nlohmann::json& j, WorkloadParams& p);
void from_json(const nlohmann::json& j, TimeIndexedParams& p);

struct Generated {
  MilpInstance inst;
  StructuredView view;
};

// Each throws GenerationError on invalid parameters or after 20 rejected draws.
Generated gen_item_placement(const ItemPlacementParams& p);
Generated gen_workload(const WorkloadParams& p);
Generated gen_time_indexed(const TimeIndexedParams& p);

// Throws GenerationError naming the first structural property that fails.
void validate_structure(const MilpInstance& inst, const StructuredView& view);

struct RecoveredPeriods {
  std::vector<int> period;  // 1-based per variable; 0 for continuous ones
  int num_periods = 0;
  bool disconnected = false;
};

// Labels integer variables by layering their co-occurrence graph. Variables
// with identical closed neighbourhoods share a label; layers are counted from
// the lowest-degree group with the smallest variable index.
RecoveredPeriods recover_periods(const MilpInstance& inst);

}  // namespace deskmip
