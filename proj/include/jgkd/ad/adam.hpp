// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "jgkd/ad/param.hpp"

namespace jgkd::ad {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(const ParamSet& params, AdamConfig config);

  // Applies one update from the accumulated gradients, then zeroes them.
  void step(ParamSet& params);
  std::size_t steps() const { return t_; }

 private:
  AdamConfig cfg_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace jgkd::ad
