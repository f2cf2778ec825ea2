// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

// Free-format MPS reader and writer.
//
// Supported sections, in this order: NAME, ROWS, COLUMNS, RHS, BOUNDS, ENDATA.
// RHS and BOUNDS are optional. Row types N/L/G/E; bound types UP, LO, FX, BV
// and MI. Integer columns are delimited by MARKER INTORG / INTEND lines.
// RANGES, OBJSENSE and an RHS entry on the objective row are rejected.

#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

#include "deskmip/model.h"

namespace deskmip {

class MpsError : public std::runtime_error {
 public:
  MpsError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

MilpInstance parse_mps(std::string_view text);
MilpInstance read_mps_file(const std::string& path);

std::string write_mps(const MilpInstance& inst);
void write_mps_file(const MilpInstance& inst, const std::string& path);

}  // namespace deskmip
