// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "jgkd/ad/grad_check.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <vector>

#include "jgkd/errors.hpp"

namespace jgkd::ad {

namespace {

double evaluate(const ScalarFn& f) {
  Tape tape;
  return f(tape).item();
}

}  // namespace

GradCheckReport grad_check(const ScalarFn& f, std::span<Parameter* const> params, double h, double tol) {
  if (!(h > 0.0) || !(tol > 0.0)) throw ValidationError("grad_check: step and tolerance must be positive");

  for (Parameter* p : params) p->zero_grad();
  double base = 0.0;
  {
    Tape tape;
    Var loss = f(tape);
    base = loss.item();
    tape.backward(loss);
  }
  if (std::bit_cast<std::uint64_t>(base) != std::bit_cast<std::uint64_t>(evaluate(f))) {
    throw DeterminismError("grad_check: two evaluations of the objective at the same point differ");
  }

  GradCheckReport report;
  for (Parameter* p : params) {
    const std::vector<double> analytic = p->grad;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + h;
      const double fp = evaluate(f);
      p->value[i] = saved - h;
      const double fm = evaluate(f);
      p->value[i] = saved;
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      ++report.checked;
      if (report.worst_param.empty() || rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = p->name;
        report.worst_index = i;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  report.passed = report.max_rel_error <= tol;
  return report;
}

GradCheckReport grad_check(const ScalarFn& f, ParamSet& params, double h, double tol) {
  std::vector<Parameter*> ptrs;
  for (auto& p : params) ptrs.push_back(&p);
  return grad_check(f, ptrs, h, tol);
}

}  // namespace jgkd::ad
