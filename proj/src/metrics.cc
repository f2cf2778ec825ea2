// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskmip/metrics.h"

#include <cmath>
#include <limits>
#include <string>

namespace deskmip {

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kPrimalUpdate:
      return "primal";
    case EventKind::kDualUpdate:
      return "dual";
    case EventKind::kNodeProcessed:
      return "node";
  }
  return "?";
}

bool BoundsTimeline::improve_primal(double t, double value) {
  const auto cur = primal_at(std::numeric_limits<double>::infinity());
  if (cur && !(value < *cur)) return false;
  events.push_back({t, EventKind::kPrimalUpdate, value});
  return true;
}

bool BoundsTimeline::improve_dual(double t, double value) {
  const auto cur = dual_at(std::numeric_limits<double>::infinity());
  if (cur && !(value > *cur)) return false;
  events.push_back({t, EventKind::kDualUpdate, value});
  return true;
}

void BoundsTimeline::node(double t, double count) {
  events.push_back({t, EventKind::kNodeProcessed, count});
}

std::optional<double> BoundsTimeline::primal_at(double t) const {
  std::optional<double> v = initial_primal;
  for (const auto& e : events) {
    if (e.t > t) break;
    if (e.kind == EventKind::kPrimalUpdate) v = e.value;
  }
  return v;
}

std::optional<double> BoundsTimeline::dual_at(double t) const {
  std::optional<double> v = initial_dual;
  for (const auto& e : events) {
    if (e.t > t) break;
    if (e.kind == EventKind::kDualUpdate) v = e.value;
  }
  return v;
}

void BoundsTimeline::validate() const {
  if (!(horizon >= 0) || !std::isfinite(horizon)) throw MetricError("horizon must be finite");
  double last_t = 0.0;
  std::optional<double> pb = initial_primal;
  std::optional<double> db = initial_dual;
  for (std::size_t k = 0; k < events.size(); ++k) {
    const auto& e = events[k];
    if (e.t < last_t) throw MetricError("event " + std::to_string(k) + " is out of time order");
    if (e.t < 0 || e.t > horizon)
      throw MetricError("event " + std::to_string(k) + " lies outside [0, T]");
    last_t = e.t;
    if (e.kind == EventKind::kPrimalUpdate) {
      if (pb && e.value > *pb) throw MetricError("primal bound increases at event " + std::to_string(k));
      pb = e.value;
    } else if (e.kind == EventKind::kDualUpdate) {
      if (db && e.value < *db) throw MetricError("dual bound decreases at event " + std::to_string(k));
      db = e.value;
    }
  }
}

namespace {

// Integral of one step track. Consecutive segments with equal values are
// merged before multiplying, so inserting a redundant event changes nothing.
double track_integral(const BoundsTimeline& tl, EventKind kind, std::optional<double> initial) {
  tl.validate();
  double area = 0.0;
  std::optional<double> value = initial;
  double seg_start = 0.0;
  for (const auto& e : tl.events) {
    if (e.kind != kind) continue;
    if (value && e.value == *value) continue;
    if (value) area += *value * (e.t - seg_start);
    else if (e.t > 0.0) throw MetricError(std::string("missing initial ") + to_string(kind) + " bound");
    value = e.value;
    seg_start = e.t;
  }
  if (!value) throw MetricError(std::string("missing initial ") + to_string(kind) + " bound");
  area += *value * (tl.horizon - seg_start);
  return area;
}

}  // namespace

double primal_integral(const BoundsTimeline& tl, double opt) {
  return track_integral(tl, EventKind::kPrimalUpdate, tl.initial_primal) - tl.horizon * opt;
}

double dual_integral(const BoundsTimeline& tl, double opt) {
  return tl.horizon * opt - track_integral(tl, EventKind::kDualUpdate, tl.initial_dual);
}

double gap_integral(const BoundsTimeline& tl) {
  if (!tl.initial_primal || !tl.initial_dual)
    throw MetricError("gap integral needs both initial bounds");
  tl.validate();
  // Walk the merged breakpoints of both tracks.
  double area = 0.0;
  double pb = *tl.initial_primal;
  double db = *tl.initial_dual;
  double seg_start = 0.0;
  for (const auto& e : tl.events) {
    if (e.kind == EventKind::kNodeProcessed) continue;
    double& v = e.kind == EventKind::kPrimalUpdate ? pb : db;
    if (e.value == v) continue;
    area += (pb - db) * (e.t - seg_start);
    seg_start = e.t;
    v = e.value;
  }
  area += (pb - db) * (tl.horizon - seg_start);
  return area;
}

double cumulated_reward(const BoundsTimeline& tl) {
  return track_integral(tl, EventKind::kDualUpdate, tl.initial_dual);
}

}  // namespace deskmip
