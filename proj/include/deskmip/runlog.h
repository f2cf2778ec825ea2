// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

// Per-run artifacts: a versioned JSON run log holding the bound timeline, and
// small CSV helpers. Doubles are written in shortest round-trip form, so
// metrics recomputed from a log match the ones computed at run time exactly.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deskmip/metrics.h"
#include "json.hpp"

namespace deskmip {

inline constexpr const char* kRunLogSchema = "v1";

struct RunLog {
  // Header.
  std::string instance;
  std::string family;
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();
  std::string clock = "simulated";
  // Bounds and their updates; node events are summarized by the footer.
  BoundsTimeline timeline;
  // Footer.
  std::string status;
  long nodes = 0;

  std::string config_hash() const;
};

// 64-bit FNV-1a of the compact JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

nlohmann::json to_json(const RunLog& log);
// Throws std::runtime_error on a malformed or wrong-version document.
RunLog runlog_from_json(const nlohmann::json& j);

void write_runlog(const RunLog& log, const std::string& path);
RunLog read_runlog(const std::string& path);

// Shortest round-trip decimal form; empty for a missing value.
std::string format_double(double v);
std::string format_double(const std::optional<double>& v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
  std::string to_string() const;
};

// Plain comma-separated values without quoting. Throws std::runtime_error on
// an empty document or a row whose width differs from the header.
CsvTable parse_csv(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Sorted paths matching a shell pattern. Empty when nothing matches.
std::vector<std::string> glob_paths(const std::string& pattern);

}  // namespace deskmip
