// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace jgkd::cli {

struct CheckItem {
  std::string group;  // primitive | loss | oracle
  std::string name;
  double error = 0;   // max relative error (grad checks) or absolute deviation (oracles)
  double tol = 0;
  bool passed = true;
  std::string detail;
};

// Finite-difference checks of every primitive and the nine loss values on
// random small shapes, plus the loss oracle table. With `defect`, that op's
// backward rule is scaled by 2 for the duration of the run.
std::vector<CheckItem> run_selfcheck(std::uint64_t seed = 1, const std::optional<std::string>& defect = std::nullopt);

// Prints one line per item and a summary; returns true when all passed.
bool report_selfcheck(const std::vector<CheckItem>& items, std::ostream& out);

}  // namespace jgkd::cli
