// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "jgkd/ad/param.hpp"
#include "jgkd/ad/tape.hpp"

namespace jgkd::ad {

// A randomised gradient-check case: parameters plus a scalar objective that
// exercises one primitive.
struct GradCase {
  std::string name;
  std::string primitive;
  ParamSet params;
  std::function<Var(Tape&, ParamSet&)> build;
};

// At least one case per entry of primitive_registry(), with every dimension
// drawn from [1, 8].
std::vector<GradCase> primitive_grad_cases(std::uint64_t seed);

}  // namespace jgkd::ad
