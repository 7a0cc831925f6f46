// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "jgkd/ad/adam.hpp"

#include <cmath>

#include "jgkd/errors.hpp"

namespace jgkd::ad {

Adam::Adam(const ParamSet& params, AdamConfig config) : cfg_(config) {
  if (!(cfg_.lr > 0.0)) throw ValidationError("Adam: lr must be positive");
  for (const auto& p : params) {
    m_.emplace_back(p.value.size(), 0.0);
    v_.emplace_back(p.value.size(), 0.0);
  }
}

void Adam::step(ParamSet& params) {
  if (params.size() != m_.size()) throw ShapeError("Adam: parameter set changed size");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      const double g = p.grad[j];
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g;
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g * g;
      p.value[j] -= cfg_.lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + cfg_.eps);
    }
    p.zero_grad();
  }
}

}  // namespace jgkd::ad
