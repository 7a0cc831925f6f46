// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "jgkd/losses/oracle.hpp"

#include <cmath>

#include "jgkd/losses/losses.hpp"

namespace jgkd::losses {

using ad::Tape;
using ad::Tensor;

bool OracleCase::passed() const { return std::abs(actual - expected) <= tol; }

std::vector<OracleCase> loss_oracle_table() {
  std::vector<OracleCase> out;
  auto c = [](Tape& t, Tensor v) { return t.constant(std::move(v)); };

  {
    Tape t;
    const std::size_t y[] = {0};
    out.push_back({"ce_uniform_2class", std::log(2.0), task_ce(c(t, Tensor::matrix({{0, 0}})), y).item(), 1e-9});
  }
  {
    Tape t;
    const ad::Var teacher[] = {c(t, Tensor::matrix({{0.3, -1.2, 2.0}, {1.0, 0.5, -0.5}}))};
    out.push_back({"similarity_identical", -1.0,
                   similarity_loss(teacher, c(t, Tensor::matrix({{0.3, -1.2, 2.0}, {1.0, 0.5, -0.5}}))).item(),
                   1e-9});
  }
  {
    Tape t;
    const ad::Var teacher[] = {c(t, Tensor::matrix({{1, 0}}))};
    out.push_back({"similarity_1_0_vs_1_1", -1.0 / std::sqrt(2.0),
                   similarity_loss(teacher, c(t, Tensor::matrix({{1, 1}}))).item(), 1e-6});
  }
  {
    Tape t;
    const ad::Var teacher[] = {c(t, Tensor::matrix({{0.3, -1.2}, {4.0, 0.25}}))};
    out.push_back({"distil_identical", 0.0,
                   distil_loss(teacher, c(t, Tensor::matrix({{0.3, -1.2}, {4.0, 0.25}}))).item(), 1e-9});
  }
  {
    Tape t;
    const ad::Var teacher[] = {c(t, Tensor::matrix({{0, 2}}))};
    out.push_back({"distil_0_2_vs_1_0", 2.5, distil_loss(teacher, c(t, Tensor::matrix({{1, 0}}))).item(), 1e-9});
  }
  {
    Tape t;
    const Tensor rows = Tensor::matrix({{0.5, -1.0, 2.0}, {1.5, 0.0, -0.5}});
    out.push_back({"triplet_equal_candidates", 1.0,
                   triplet_hinge(c(t, Tensor::matrix({{0, 0, 0}, {1, 1, 1}})), c(t, rows), c(t, rows), 1.0).item(),
                   0.0});
  }
  {
    Tape t;
    out.push_back({"triplet_1d", 0.5,
                   triplet_hinge(c(t, Tensor::matrix({{0}})), c(t, Tensor::matrix({{1.0}})),
                                 c(t, Tensor::matrix({{1.5}})), 1.0)
                       .item(),
                   1e-9});
  }
  {
    Tape t;
    const std::size_t owners[] = {0, 0, 0};
    out.push_back({"align_single_entity", 0.0,
                   alignment_loss(c(t, Tensor::matrix({{1, 2}, {-3, 0.5}, {0, 7}})), c(t, Tensor::matrix({{0.4, -2}})),
                                  owners)
                       .item(),
                   1e-9});
  }
  {
    Tape t;
    const std::size_t owners[] = {0, 2};
    out.push_back({"align_orthogonal", std::log(3.0),
                   alignment_loss(c(t, Tensor::matrix({{0, 0, 1}, {0, 0, -2}})),
                                  c(t, Tensor::matrix({{1, 0, 0}, {0, 1, 0}, {1, -1, 0}})), owners)
                       .item(),
                   1e-9});
  }
  {
    Tape t;
    const std::size_t owners[] = {0};
    out.push_back({"align_basis", std::log1p(std::exp(-1.0)),
                   alignment_loss(c(t, Tensor::matrix({{1, 0, 0}})), c(t, Tensor::matrix({{1, 0, 0}, {0, 1, 0}})),
                                  owners)
                       .item(),
                   1e-4});
  }
  return out;
}

}  // namespace jgkd::losses
