// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskmip/mps.h"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <vector>

namespace deskmip {
namespace {

enum class Section { kNone, kName, kRows, kColumns, kRhs, kBounds, kEnd };

int order(Section s) { return static_cast<int>(s); }

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_number(std::string_view field, int line) {
  std::string s(field);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || std::isnan(v))
    throw MpsError(line, "non-numeric field '" + s + "'");
  if (v >= 1e30) return kInf;
  if (v <= -1e30) return -kInf;
  return v;
}

class Parser {
 public:
  MilpInstance run(std::string_view text) {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t eol = text.find('\n', pos);
      if (eol == std::string_view::npos) eol = text.size();
      std::string_view line = text.substr(pos, eol - pos);
      pos = eol + 1;
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty() || line[0] == '*') continue;
      const auto fields = split_fields(line);
      if (fields.empty()) continue;
      if (line[0] != ' ' && line[0] != '\t') {
        header(fields, line_no);
        if (section_ == Section::kEnd) break;
      } else {
        entry(fields, line_no);
      }
      if (eol == text.size()) break;
    }
    if (section_ != Section::kEnd) throw MpsError(line_no, "missing ENDATA");
    if (!have_objective_) throw MpsError(line_no, "no objective (N) row");
    for (std::size_t i = 0; i < rows_.size(); ++i)
      inst_.add_row(std::move(rows_[i]), senses_[i], rhs_[i], row_names_[i]);
    try {
      inst_.validate();
    } catch (const ModelError& e) {
      throw MpsError(line_no, e.what());
    }
    return std::move(inst_);
  }

 private:
  void header(const std::vector<std::string_view>& f, int line) {
    static const std::map<std::string_view, Section> kSections = {
        {"NAME", Section::kName},       {"ROWS", Section::kRows},
        {"COLUMNS", Section::kColumns}, {"RHS", Section::kRhs},
        {"BOUNDS", Section::kBounds},   {"ENDATA", Section::kEnd}};
    const auto it = kSections.find(f[0]);
    if (it == kSections.end()) {
      if (f[0] == "RANGES" || f[0] == "OBJSENSE" || f[0] == "OBJSENSE:")
        throw MpsError(line, "unsupported section " + std::string(f[0]));
      throw MpsError(line, "unknown section " + std::string(f[0]));
    }
    const Section next = it->second;
    if (order(next) <= order(section_))
      throw MpsError(line, "section " + std::string(f[0]) + " out of order");
    if (next == Section::kColumns && section_ != Section::kRows)
      throw MpsError(line, "COLUMNS must follow ROWS");
    if (next != Section::kName && next != Section::kRows && section_ == Section::kNone)
      throw MpsError(line, "file must start with NAME or ROWS");
    if (next == Section::kName) inst_.name = f.size() > 1 ? std::string(f[1]) : std::string();
    section_ = next;
  }

  void entry(const std::vector<std::string_view>& f, int line) {
    switch (section_) {
      case Section::kRows:
        row_entry(f, line);
        break;
      case Section::kColumns:
        column_entry(f, line);
        break;
      case Section::kRhs:
        rhs_entry(f, line);
        break;
      case Section::kBounds:
        bound_entry(f, line);
        break;
      default:
        throw MpsError(line, "data line outside of a data section");
    }
  }

  void row_entry(const std::vector<std::string_view>& f, int line) {
    if (f.size() != 2) throw MpsError(line, "ROWS entry needs a type and a name");
    const std::string name(f[1]);
    if (row_index_.count(name) || name == objective_name_)
      throw MpsError(line, "duplicate row " + name);
    if (f[0] == "N") {
      if (!have_objective_) {
        objective_name_ = name;
        have_objective_ = true;
      } else {
        free_rows_.insert(name);
      }
      return;
    }
    RowSense sense;
    if (f[0] == "L")
      sense = RowSense::kLe;
    else if (f[0] == "G")
      sense = RowSense::kGe;
    else if (f[0] == "E")
      sense = RowSense::kEq;
    else
      throw MpsError(line, "unknown row type " + std::string(f[0]));
    row_index_[name] = static_cast<int>(rows_.size());
    rows_.emplace_back();
    senses_.push_back(sense);
    rhs_.push_back(0.0);
    row_names_.push_back(name);
  }

  int column(std::string_view name) {
    const std::string key(name);
    const auto it = col_index_.find(key);
    if (it != col_index_.end()) return it->second;
    const int j = inst_.add_var(0.0, kInf, 0.0, in_integer_block_, key);
    col_index_[key] = j;
    return j;
  }

  void column_entry(const std::vector<std::string_view>& f, int line) {
    if (f.size() >= 3 && f[1] == "'MARKER'") {
      if (f[2] == "'INTORG'")
        in_integer_block_ = true;
      else if (f[2] == "'INTEND'")
        in_integer_block_ = false;
      else
        throw MpsError(line, "unknown marker " + std::string(f[2]));
      return;
    }
    if (f.size() != 3 && f.size() != 5)
      throw MpsError(line, "COLUMNS entry needs a column and one or two (row, value) pairs");
    const int j = column(f[0]);
    for (std::size_t k = 1; k + 1 < f.size(); k += 2) {
      const std::string row(f[k]);
      const double v = parse_number(f[k + 1], line);
      if (!seen_.insert({j, row}).second)
        throw MpsError(line, "duplicate entry for column " + std::string(f[0]) + " in row " + row);
      if (have_objective_ && row == objective_name_) {
        inst_.objective[j] = v;
        continue;
      }
      if (free_rows_.count(row)) continue;
      const auto it = row_index_.find(row);
      if (it == row_index_.end()) throw MpsError(line, "unknown row " + row);
      rows_[it->second].add(j, v);
    }
  }

  void rhs_entry(const std::vector<std::string_view>& f, int line) {
    // The set name is optional in free format, which makes the field count odd.
    const std::size_t first = f.size() % 2 == 1 ? 1 : 0;
    if (f.size() - first != 2 && f.size() - first != 4)
      throw MpsError(line, "RHS entry needs one or two (row, value) pairs");
    for (std::size_t k = first; k + 1 < f.size(); k += 2) {
      const std::string row(f[k]);
      const double v = parse_number(f[k + 1], line);
      if (row == objective_name_) throw MpsError(line, "RHS on the objective row is not supported");
      if (free_rows_.count(row)) continue;
      const auto it = row_index_.find(row);
      if (it == row_index_.end()) throw MpsError(line, "unknown row " + row);
      rhs_[it->second] = v;
    }
  }

  void bound_entry(const std::vector<std::string_view>& f, int line) {
    if (f.size() < 2) throw MpsError(line, "BOUNDS entry too short");
    const std::string_view type = f[0];
    const bool needs_value = type == "UP" || type == "LO" || type == "FX";
    // Layouts: TYPE SET COL [VAL] or TYPE COL [VAL] when the set name is omitted.
    std::string_view col;
    std::string_view val;
    if (needs_value) {
      if (f.size() == 4) {
        col = f[2];
        val = f[3];
      } else if (f.size() == 3) {
        col = f[1];
        val = f[2];
      } else {
        throw MpsError(line, std::string(type) + " bound needs a column and a value");
      }
    } else if (type == "BV" || type == "MI") {
      if (f.size() == 2) {
        col = f[1];
      } else if (f.size() == 3) {
        // Either "BV SET COL" or "BV COL VALUE"; a known column name decides.
        if (col_index_.count(std::string(f[2])))
          col = f[2];
        else
          col = f[1], val = f[2];
      } else if (f.size() == 4) {
        col = f[2];
        val = f[3];
      } else {
        throw MpsError(line, "malformed " + std::string(type) + " bound");
      }
    } else {
      throw MpsError(line, "unsupported bound type " + std::string(type));
    }
    const auto it = col_index_.find(std::string(col));
    if (it == col_index_.end()) throw MpsError(line, "bound on unknown column " + std::string(col));
    const int j = it->second;
    if (type == "UP") {
      inst_.upper[j] = parse_number(val, line);
    } else if (type == "LO") {
      inst_.lower[j] = parse_number(val, line);
    } else if (type == "FX") {
      const double v = parse_number(val, line);
      inst_.lower[j] = v;
      inst_.upper[j] = v;
    } else if (type == "BV") {
      if (!val.empty()) parse_number(val, line);
      inst_.lower[j] = 0.0;
      inst_.upper[j] = 1.0;
      inst_.is_integer[j] = true;
    } else {  // MI
      if (!val.empty()) parse_number(val, line);
      inst_.lower[j] = -kInf;
    }
  }

  MilpInstance inst_;
  Section section_ = Section::kNone;
  bool have_objective_ = false;
  bool in_integer_block_ = false;
  std::string objective_name_;
  std::set<std::string> free_rows_;
  std::unordered_map<std::string, int> row_index_;
  std::unordered_map<std::string, int> col_index_;
  std::set<std::pair<int, std::string>> seen_;
  std::vector<SparseRow> rows_;
  std::vector<RowSense> senses_;
  std::vector<double> rhs_;
  std::vector<std::string> row_names_;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

MilpInstance parse_mps(std::string_view text) { return Parser().run(text); }

MilpInstance read_mps_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_mps(buf.str());
}

std::string write_mps(const MilpInstance& inst) {
  const int n = inst.num_vars();
  // Column-wise view of the rows.
  std::vector<std::vector<std::pair<int, double>>> cols(n);
  for (int i = 0; i < inst.num_rows(); ++i) {
    const auto& r = inst.constraints[i].row;
    for (std::size_t k = 0; k < r.size(); ++k) cols[r.index[k]].emplace_back(i, r.value[k]);
  }

  std::string out;
  out += "NAME " + inst.name + "\n";
  out += "ROWS\n N obj\n";
  for (int i = 0; i < inst.num_rows(); ++i) {
    const char* t = "L";
    if (inst.constraints[i].sense == RowSense::kGe) t = "G";
    if (inst.constraints[i].sense == RowSense::kEq) t = "E";
    out += std::string(" ") + t + " " + inst.row_names[i] + "\n";
  }
  out += "COLUMNS\n";
  bool in_block = false;
  int marker = 0;
  for (int j = 0; j < n; ++j) {
    if (inst.is_integer[j] != in_block) {
      out += std::string("    MARKER") + std::to_string(marker++) + " 'MARKER' " +
             (inst.is_integer[j] ? "'INTORG'" : "'INTEND'") + "\n";
      in_block = inst.is_integer[j];
    }
    const std::string& name = inst.var_names[j];
    if (inst.objective[j] != 0.0 || cols[j].empty())
      out += "    " + name + " obj " + num(inst.objective[j]) + "\n";
    for (const auto& [i, v] : cols[j])
      out += "    " + name + " " + inst.row_names[i] + " " + num(v) + "\n";
  }
  if (in_block) out += "    MARKER" + std::to_string(marker++) + " 'MARKER' 'INTEND'\n";
  out += "RHS\n";
  for (int i = 0; i < inst.num_rows(); ++i)
    if (inst.constraints[i].rhs != 0.0)
      out += "    RHS " + inst.row_names[i] + " " + num(inst.constraints[i].rhs) + "\n";
  out += "BOUNDS\n";
  for (int j = 0; j < n; ++j) {
    const double lo = inst.lower[j];
    const double hi = inst.upper[j];
    const std::string& name = inst.var_names[j];
    if (lo == hi) {
      out += " FX BND " + name + " " + num(lo) + "\n";
      continue;
    }
    if (lo == -kInf)
      out += " MI BND " + name + "\n";
    else if (lo != 0.0)
      out += " LO BND " + name + " " + num(lo) + "\n";
    if (hi != kInf) out += " UP BND " + name + " " + num(hi) + "\n";
  }
  out += "ENDATA\n";
  return out;
}

void write_mps_file(const MilpInstance& inst, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << write_mps(inst);
}

}  // namespace deskmip
