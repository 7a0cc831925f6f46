// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace jgkd::losses {

// One hand-evaluated loss value compared with the library's result.
struct OracleCase {
  std::string name;
  double expected = 0;
  double actual = 0;
  double tol = 0;

  bool passed() const;
};

// Fixed reference inputs whose loss values are known in closed form.
std::vector<OracleCase> loss_oracle_table();

}  // namespace jgkd::losses
