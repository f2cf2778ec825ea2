// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <limits>

namespace deskmip {

// Cost model used by the simulated clock. Every component that does work
// charges the clock in these units, so a simulated run is a deterministic
// function of the work performed.
struct WorkCosts {
  double pivot_seconds = 1e-4;      // one simplex iteration
  double node_seconds = 5e-4;       // branch-and-bound node bookkeeping
  double move_eval_seconds = 2e-6;  // one local-search move evaluation
};

// Time source for anytime metrics. Solvers never read the system clock
// directly; they call now() and report work through charge().
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() const = 0;
  // Report work performed. Simulated clocks advance; wall clocks ignore it.
  virtual void charge(double seconds) = 0;
  virtual bool simulated() const = 0;

  const WorkCosts& costs() const { return costs_; }
  void set_costs(const WorkCosts& c) { costs_ = c; }

 private:
  WorkCosts costs_;
};

class SimulatedClock final : public Clock {
 public:
  double now() const override { return now_; }
  void charge(double seconds) override { now_ += seconds; }
  bool simulated() const override { return true; }

 private:
  double now_ = 0.0;
};

class WallClock final : public Clock {
 public:
  WallClock() : start_(std::chrono::steady_clock::now()) {}
  double now() const override {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  void charge(double) override {}
  bool simulated() const override { return false; }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Absolute point on a clock after which work should stop.
class Deadline {
 public:
  Deadline() = default;
  Deadline(const Clock* clock, double budget_seconds)
      : clock_(clock), at_(clock ? clock->now() + budget_seconds : kNever) {}

  static Deadline never() { return Deadline(); }

  bool expired() const { return clock_ != nullptr && clock_->now() >= at_; }
  double remaining() const {
    return clock_ == nullptr ? kNever : at_ - clock_->now();
  }

 private:
  static constexpr double kNever = std::numeric_limits<double>::infinity();
  const Clock* clock_ = nullptr;
  double at_ = kNever;
};

}  // namespace deskmip
