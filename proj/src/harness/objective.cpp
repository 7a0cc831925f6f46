// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "jgkd/harness/objective.hpp"

#include "jgkd/errors.hpp"

namespace jgkd::harness {

void check_loss_roster(const student::StudentConfig& config, const losses::LossWeights& weights) {
  weights.validate();
  if (weights.triplet.enabled && (config.fine_dims.size() < 2 || config.coarse_dims.size() < 2)) {
    throw ConfigError("triplet loss needs at least two fine and two coarse teachers (roster has " +
                      std::to_string(config.fine_dims.size()) + " fine, " +
                      std::to_string(config.coarse_dims.size()) + " coarse); disable it or extend the roster");
  }
}

PageObjective page_objective(nn::Binder& b, const student::Student& s, const student::TeacherOutputs& outputs,
                             const corpus::DocumentPage& page, const losses::LossWeights& weights, Rng& rng) {
  for (const auto& o : outputs.fine) {
    if (o.hidden.rows() != page.num_tokens()) {
      throw ShapeError("page '" + page.id + "' has " + std::to_string(page.num_tokens()) +
                       " tokens, fine teacher output has " + std::to_string(o.hidden.rows()) + " rows");
    }
  }
  for (const auto& o : outputs.coarse) {
    if (o.hidden.rows() != page.num_entities()) {
      throw ShapeError("page '" + page.id + "' has " + std::to_string(page.num_entities()) +
                       " entities, coarse teacher output has " + std::to_string(o.hidden.rows()) + " rows");
    }
  }
  check_loss_roster(s.config(), weights);

  PageObjective out;
  out.vars = s.forward(b, outputs);
  const auto token_labels = page.token_labels();
  const auto entity_labels = page.entity_labels();
  const auto owners = page.token_owners();

  losses::LossInputs in;
  in.p_t = out.vars.p_t;
  in.p_e = out.vars.p_e;
  in.t = out.vars.t;
  in.e = out.vars.e;
  ad::Tape& tape = b.tape();
  if (weights.similarity.enabled || weights.distilling.enabled) {
    for (const auto& o : outputs.fine) in.fine_logits.push_back(tape.constant(o.logits));
    for (const auto& o : outputs.coarse) in.coarse_logits.push_back(tape.constant(o.logits));
  }
  if (weights.triplet.enabled) {
    for (std::size_t i = 0; i < outputs.fine.size(); ++i) in.bridged_fine.push_back(s.bridge_fine(b, i, outputs.fine[i].hidden));
    for (std::size_t i = 0; i < outputs.coarse.size(); ++i) {
      in.bridged_coarse.push_back(s.bridge_coarse(b, i, outputs.coarse[i].hidden));
    }
  }
  in.token_labels = token_labels;
  in.entity_labels = entity_labels;
  in.owners = owners;
  out.loss = losses::total_loss(in, weights, rng);
  return out;
}

}  // namespace jgkd::harness
