// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

// The deskmip command line. Every command writes its artifacts under --out;
// under the default simulated clock identical arguments produce identical
// bytes.
//
//   generate         seeded corpus: <family>-NNNN.mps, sidecars, manifest.json
//   primal           primal heuristic pipeline -> run logs + primal.csv
//   dual             tree search without heuristics -> run logs + dual.csv
//   train-branching  imitation rounds + weight averaging -> model.json, report.json
//   tune             space reduction + sub-space tuning -> config, history
//   report           per-family summary, bound series, log cross-check

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "deskmip/generators.h"

namespace deskmip {

enum ExitCode : int { kExitOk = 0, kExitPartial = 1, kExitFatal = 2 };

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Reads X.mps and, when present, the sidecar X.structure.json. The instance
// is named after the file stem.
Generated load_instance(const std::string& mps_path);

}  // namespace deskmip
