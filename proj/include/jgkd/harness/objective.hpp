// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "jgkd/losses/losses.hpp"
#include "jgkd/student/student.hpp"

namespace jgkd::harness {

// Throws ConfigError when the enabled losses cannot run on the student's
// roster (triplet needs two teachers of each grain).
void check_loss_roster(const student::StudentConfig& config, const losses::LossWeights& weights);

struct PageObjective {
  student::ForwardVars vars;
  losses::TotalLoss loss;
};

// Student forward plus the weighted loss on one page.
PageObjective page_objective(nn::Binder& b, const student::Student& s, const student::TeacherOutputs& outputs,
                             const corpus::DocumentPage& page, const losses::LossWeights& weights, Rng& rng);

}  // namespace jgkd::harness
