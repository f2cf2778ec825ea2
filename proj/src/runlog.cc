// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskmip/runlog.h"

#include <glob.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace deskmip {

using nlohmann::json;

std::string config_hash(const json& config) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string RunLog::config_hash() const { return deskmip::config_hash(config); }

namespace {

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  if (!j.is_number()) throw std::runtime_error("run log: expected a number or null");
  return j.get<double>();
}

EventKind kind_from(const std::string& s) {
  if (s == "primal") return EventKind::kPrimalUpdate;
  if (s == "dual") return EventKind::kDualUpdate;
  if (s == "node") return EventKind::kNodeProcessed;
  throw std::runtime_error("run log: unknown event kind '" + s + "'");
}

}  // namespace

json to_json(const RunLog& log) {
  json events = json::array();
  for (const auto& e : log.timeline.events) {
    if (e.kind == EventKind::kNodeProcessed) continue;
    events.push_back(json::array({e.t, to_string(e.kind), e.value}));
  }
  return json{
      {"schema", kRunLogSchema},
      {"header",
       {{"instance", log.instance},
        {"family", log.family},
        {"seed", log.seed},
        {"config", log.config},
        {"config_hash", log.config_hash()},
        {"clock", log.clock},
        {"horizon", log.timeline.horizon}}},
      {"initial_primal", opt_json(log.timeline.initial_primal)},
      {"initial_dual", opt_json(log.timeline.initial_dual)},
      {"events", std::move(events)},
      {"footer",
       {{"status", log.status},
        {"final_primal", opt_json(log.timeline.final_primal())},
        {"final_dual", opt_json(log.timeline.final_dual())},
        {"nodes", log.nodes}}},
  };
}

RunLog runlog_from_json(const json& j) {
  try {
    if (j.at("schema").get<std::string>() != kRunLogSchema)
      throw std::runtime_error("run log: unsupported schema " + j.at("schema").dump());
    RunLog log;
    const json& h = j.at("header");
    log.instance = h.at("instance").get<std::string>();
    log.family = h.at("family").get<std::string>();
    log.seed = h.at("seed").get<std::uint64_t>();
    log.config = h.at("config");
    log.clock = h.at("clock").get<std::string>();
    log.timeline.horizon = h.at("horizon").get<double>();
    if (h.at("config_hash").get<std::string>() != log.config_hash())
      throw std::runtime_error("run log: config hash does not match the config");
    log.timeline.initial_primal = opt_from(j.at("initial_primal"));
    log.timeline.initial_dual = opt_from(j.at("initial_dual"));
    for (const json& e : j.at("events")) {
      if (!e.is_array() || e.size() != 3) throw std::runtime_error("run log: malformed event");
      log.timeline.events.push_back(
          {e[0].get<double>(), kind_from(e[1].get<std::string>()), e[2].get<double>()});
    }
    const json& f = j.at("footer");
    log.status = f.at("status").get<std::string>();
    log.nodes = f.at("nodes").get<long>();
    log.timeline.validate();
    return log;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("run log: ") + e.what());
  } catch (const MetricError& e) {
    throw std::runtime_error(std::string("run log: ") + e.what());
  }
}

void write_runlog(const RunLog& log, const std::string& path) {
  write_text_file(path, to_json(log).dump(1) + "\n");
}

RunLog read_runlog(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return runlog_from_json(j);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string format_double(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

int CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

namespace {

void append_row(std::string& out, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    out += row[i];
  }
  out += '\n';
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

std::string CsvTable::to_string() const {
  std::string out;
  append_row(out, header);
  for (const auto& r : rows) append_row(out, r);
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
    } else if (cells.size() != t.header.size()) {
      throw std::runtime_error("csv line " + std::to_string(lineno) + ": expected " +
                               std::to_string(t.header.size()) + " fields, got " +
                               std::to_string(cells.size()));
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  if (t.header.empty()) throw std::runtime_error("csv: empty document");
  return t;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<std::string> glob_paths(const std::string& pattern) {
  glob_t g{};
  std::vector<std::string> out;
  if (::glob(pattern.c_str(), 0, nullptr, &g) == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  }
  ::globfree(&g);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace deskmip
