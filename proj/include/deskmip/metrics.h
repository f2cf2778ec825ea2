// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

// Bound timelines and the anytime metrics computed from them.
//
// Both bound tracks are right-continuous step functions on [0, T]: an update
// at time t is in effect from t on. The primal track starts at the trivial
// solution value and only decreases; the dual track starts at the root
// relaxation value and only increases.

#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

namespace deskmip {

enum class EventKind { kPrimalUpdate, kDualUpdate, kNodeProcessed };

const char* to_string(EventKind kind);

struct BnbEvent {
  double t = 0.0;
  EventKind kind = EventKind::kNodeProcessed;
  double value = 0.0;

  friend bool operator==(const BnbEvent&, const BnbEvent&) = default;
};

class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BoundsTimeline {
  double horizon = 0.0;
  std::optional<double> initial_primal;
  std::optional<double> initial_dual;
  std::vector<BnbEvent> events;

  // Append an update if it strictly improves the current bound.
  bool improve_primal(double t, double value);
  bool improve_dual(double t, double value);
  void node(double t, double count);

  std::optional<double> primal_at(double t) const;
  std::optional<double> dual_at(double t) const;
  std::optional<double> final_primal() const { return primal_at(horizon); }
  std::optional<double> final_dual() const { return dual_at(horizon); }

  // Throws MetricError when times are out of order or outside [0, T], or a
  // track moves in the wrong direction.
  void validate() const;

  friend bool operator==(const BoundsTimeline&, const BoundsTimeline&) = default;
};

// Integral of the primal bound over [0, T] minus T * opt.
double primal_integral(const BoundsTimeline& tl, double opt);
// T * opt minus the integral of the dual bound over [0, T].
double dual_integral(const BoundsTimeline& tl, double opt);
// Integral of (primal - dual) over [0, T].
double gap_integral(const BoundsTimeline& tl);
// Integral of the dual bound over [0, T]; larger is better.
double cumulated_reward(const BoundsTimeline& tl);

}  // namespace deskmip
