// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jgkd/ad/ops.hpp"
#include "jgkd/random.hpp"

namespace jgkd::losses {

using ad::Var;

struct Term {
  bool enabled = true;
  double weight = 1.0;
};

struct LossWeights {
  Term task_fine;
  Term task_coarse;
  Term similarity;
  Term distilling;
  Term triplet;
  Term alignment;
  double margin = 1.0;
  // Similarity and distilling summed over teachers (and, for similarity,
  // positions) instead of averaged.
  bool raw_sum = false;

  // Task losses only.
  static LossWeights task_only();
  // Task losses plus the named families: any of sim, distil, triplet, align.
  static LossWeights with(const std::vector<std::string>& families);

  // Throws ConfigError: negative weights or margin, or no task loss.
  void validate() const;
};

// Disabled parts are absent, not zero.
struct LossBreakdown {
  std::optional<double> task_fine, task_coarse;
  std::optional<double> sim_fine, sim_coarse;
  std::optional<double> distil_fine, distil_coarse;
  std::optional<double> triplet_fg, triplet_cg;
  std::optional<double> align;
  double total = 0;

  // (name, value) for every present part, in declaration order.
  std::vector<std::pair<const char*, double>> parts() const;
};

// Mean cross-entropy of logits [m x C] against labels.
Var task_ce(Var logits, std::span<const std::size_t> labels);

// -mean over (teacher, row) of cos(teacher row, student row).
Var similarity_loss(std::span<const Var> teacher_logits, Var student_logits, bool raw_sum = false);

// Mean over teachers of the elementwise MSE between teacher and student logits.
Var distil_loss(std::span<const Var> teacher_logits, Var student_logits, bool raw_sum = false);

// Row-aligned triplet hinge: for row i the candidate closer to anchor i (L2)
// is the positive, ties going to `cand_a`; returns
// mean_i max(0, d_pos - d_neg + margin).
Var triplet_hinge(Var anchors, Var cand_a, Var cand_b, double margin);

// Two distinct roster indices in increasing order; the full roster when it
// has exactly two members, otherwise a uniform draw.
std::pair<std::size_t, std::size_t> pick_pair(std::size_t roster, Rng& rng);

// Fine-grained triplet: each token's owner entity state is the anchor and
// the two picked teachers' bridged token rows are the candidates.
Var triplet_fg(Var entities, std::span<const Var> bridged_teacher_tokens, std::span<const std::size_t> owners,
               double margin, Rng& rng);

// Coarse-grained triplet: each token state is the anchor and the two picked
// teachers' bridged rows of its owner entity are the candidates.
Var triplet_cg(Var tokens, std::span<const Var> bridged_teacher_entities, std::span<const std::size_t> owners,
               double margin, Rng& rng);

// Cross-entropy of t x E^T against each token's owner entity.
Var alignment_loss(Var tokens, Var entities, std::span<const std::size_t> owners);

// Everything total_loss may need for one page.
struct LossInputs {
  Var p_t, p_e;  // student logits
  Var t, e;      // student states used by triplet and alignment
  std::vector<Var> fine_logits, coarse_logits;      // teacher logits (constants)
  std::vector<Var> bridged_fine, bridged_coarse;    // teacher hidden states in student dim
  std::span<const std::size_t> token_labels, entity_labels, owners;
};

struct TotalLoss {
  Var total;
  LossBreakdown breakdown;
};

// Weighted sum of the enabled families.
TotalLoss total_loss(const LossInputs& in, const LossWeights& weights, Rng& rng);

}  // namespace jgkd::losses
