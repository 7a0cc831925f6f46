// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>
#include <string>

#include "jgkd/ad/param.hpp"
#include "jgkd/ad/tape.hpp"

namespace jgkd::ad {

// Builds a scalar loss on a fresh tape; must bind its parameters through
// Tape::param so that backward() reaches them.
using ScalarFn = std::function<Var(Tape&)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  bool passed = true;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
};

// Compares the analytic gradient of f against central differences
// (f(x+h) - f(x-h)) / 2h element by element. Relative error uses the
// denominator max(|analytic|, |numeric|, 1e-8). Throws DeterminismError if two
// evaluations at the same point disagree.
GradCheckReport grad_check(const ScalarFn& f, std::span<Parameter* const> params, double h = 1e-5,
                           double tol = 1e-3);
GradCheckReport grad_check(const ScalarFn& f, ParamSet& params, double h = 1e-5, double tol = 1e-3);

}  // namespace jgkd::ad
