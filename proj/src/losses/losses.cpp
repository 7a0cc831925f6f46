// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "jgkd/losses/losses.hpp"

#include "jgkd/errors.hpp"

namespace jgkd::losses {

using ad::Tensor;

LossWeights LossWeights::task_only() {
  LossWeights w;
  w.similarity.enabled = false;
  w.distilling.enabled = false;
  w.triplet.enabled = false;
  w.alignment.enabled = false;
  return w;
}

LossWeights LossWeights::with(const std::vector<std::string>& families) {
  LossWeights w = task_only();
  for (const auto& f : families) {
    if (f == "sim") {
      w.similarity.enabled = true;
    } else if (f == "distil") {
      w.distilling.enabled = true;
    } else if (f == "triplet") {
      w.triplet.enabled = true;
    } else if (f == "align") {
      w.alignment.enabled = true;
    } else {
      throw ValidationError("unknown loss family '" + f + "' (expected sim, distil, triplet or align)");
    }
  }
  return w;
}

void LossWeights::validate() const {
  const std::pair<const char*, const Term*> terms[] = {{"task_fine", &task_fine},   {"task_coarse", &task_coarse},
                                                       {"similarity", &similarity}, {"distilling", &distilling},
                                                       {"triplet", &triplet},       {"alignment", &alignment}};
  for (const auto& [name, t] : terms) {
    if (!(t->weight >= 0.0)) throw ConfigError(std::string("loss weight ") + name + " must be nonnegative");
  }
  if (!(margin >= 0.0)) throw ConfigError("triplet margin must be nonnegative");
  if (!task_fine.enabled && !task_coarse.enabled) throw ConfigError("at least one task loss must be enabled");
}

std::vector<std::pair<const char*, double>> LossBreakdown::parts() const {
  std::vector<std::pair<const char*, double>> out;
  const std::pair<const char*, const std::optional<double>*> all[] = {
      {"task_fine", &task_fine},     {"task_coarse", &task_coarse}, {"sim_fine", &sim_fine},
      {"sim_coarse", &sim_coarse},   {"distil_fine", &distil_fine}, {"distil_coarse", &distil_coarse},
      {"triplet_fg", &triplet_fg},   {"triplet_cg", &triplet_cg},   {"align", &align}};
  for (const auto& [name, v] : all) {
    if (v->has_value()) out.emplace_back(name, **v);
  }
  return out;
}

Var task_ce(Var logits, std::span<const std::size_t> labels) { return ad::cross_entropy_rows(logits, labels); }

namespace {

void check_teacher_logits(std::span<const Var> teacher_logits, Var student, const char* op) {
  if (teacher_logits.empty()) throw ConfigError(std::string(op) + " needs at least one teacher");
  for (const Var& t : teacher_logits) {
    if (t.shape() != student.shape()) {
      throw ShapeError(std::string(op) + ": teacher logits " + ad::shape_str(t.shape()) + " vs student " +
                       ad::shape_str(student.shape()));
    }
  }
}

Var average(std::vector<Var> terms, bool raw_sum) {
  Var acc = terms[0];
  for (std::size_t i = 1; i < terms.size(); ++i) acc = ad::add(acc, terms[i]);
  return raw_sum ? acc : ad::scale(acc, 1.0 / static_cast<double>(terms.size()));
}

}  // namespace

Var similarity_loss(std::span<const Var> teacher_logits, Var student_logits, bool raw_sum) {
  check_teacher_logits(teacher_logits, student_logits, "similarity_loss");
  std::vector<Var> per_teacher;
  for (const Var& t : teacher_logits) {
    Var cos = ad::cosine_rows(t, student_logits);
    per_teacher.push_back(raw_sum ? ad::sum(cos) : ad::mean(cos));
  }
  return ad::scale(average(std::move(per_teacher), raw_sum), -1.0);
}

Var distil_loss(std::span<const Var> teacher_logits, Var student_logits, bool raw_sum) {
  check_teacher_logits(teacher_logits, student_logits, "distil_loss");
  std::vector<Var> per_teacher;
  for (const Var& t : teacher_logits) {
    Var d = ad::sub(t, student_logits);
    per_teacher.push_back(ad::mean(ad::mul(d, d)));
  }
  return average(std::move(per_teacher), raw_sum);
}

Var triplet_hinge(Var anchors, Var cand_a, Var cand_b, double margin) {
  if (anchors.shape() != cand_a.shape() || anchors.shape() != cand_b.shape()) {
    throw ShapeError("triplet: anchors " + ad::shape_str(anchors.shape()) + ", candidates " +
                     ad::shape_str(cand_a.shape()) + " and " + ad::shape_str(cand_b.shape()));
  }
  ad::Tape& tape = *anchors.tape;
  const std::size_t k = anchors.rows();
  Var da = ad::row_l2_norm(ad::sub(anchors, cand_a));
  Var db = ad::row_l2_norm(ad::sub(anchors, cand_b));
  // d_pos - d_neg = sign * (d_a - d_b), sign = +1 when a is the positive.
  Tensor sign({k, 1});
  for (std::size_t i = 0; i < k; ++i) sign[i] = da.value()[i] <= db.value()[i] ? 1.0 : -1.0;
  Var diff = ad::mul(tape.constant(std::move(sign)), ad::sub(da, db));
  return ad::mean(ad::relu(ad::add(diff, tape.constant(Tensor({k, 1}, margin)))));
}

std::pair<std::size_t, std::size_t> pick_pair(std::size_t roster, Rng& rng) {
  if (roster < 2) throw ConfigError("triplet losses need at least two teachers of a grain, roster has " +
                                    std::to_string(roster));
  if (roster == 2) return {0, 1};
  std::size_t i = uniform_index(rng, 0, roster - 1);
  std::size_t j = uniform_index(rng, 0, roster - 2);
  if (j >= i) ++j;
  return {std::min(i, j), std::max(i, j)};
}

Var triplet_fg(Var entities, std::span<const Var> bridged_teacher_tokens, std::span<const std::size_t> owners,
               double margin, Rng& rng) {
  const auto [a, b] = pick_pair(bridged_teacher_tokens.size(), rng);
  Var anchors = ad::gather_rows(entities, owners);
  return triplet_hinge(anchors, bridged_teacher_tokens[a], bridged_teacher_tokens[b], margin);
}

Var triplet_cg(Var tokens, std::span<const Var> bridged_teacher_entities, std::span<const std::size_t> owners,
               double margin, Rng& rng) {
  const auto [a, b] = pick_pair(bridged_teacher_entities.size(), rng);
  return triplet_hinge(tokens, ad::gather_rows(bridged_teacher_entities[a], owners),
                       ad::gather_rows(bridged_teacher_entities[b], owners), margin);
}

Var alignment_loss(Var tokens, Var entities, std::span<const std::size_t> owners) {
  return ad::cross_entropy_rows(ad::matmul(tokens, ad::transpose(entities)), owners);
}

TotalLoss total_loss(const LossInputs& in, const LossWeights& w, Rng& rng) {
  w.validate();
  TotalLoss out;
  LossBreakdown& br = out.breakdown;
  std::vector<Var> weighted;
  auto add = [&](std::optional<double>& slot, Var value, double weight) {
    slot = value.item();
    weighted.push_back(ad::scale(value, weight));
  };

  if (w.task_fine.enabled) add(br.task_fine, task_ce(in.p_t, in.token_labels), w.task_fine.weight);
  if (w.task_coarse.enabled) add(br.task_coarse, task_ce(in.p_e, in.entity_labels), w.task_coarse.weight);
  if (w.similarity.enabled) {
    add(br.sim_fine, similarity_loss(in.fine_logits, in.p_t, w.raw_sum), w.similarity.weight);
    add(br.sim_coarse, similarity_loss(in.coarse_logits, in.p_e, w.raw_sum), w.similarity.weight);
  }
  if (w.distilling.enabled) {
    add(br.distil_fine, distil_loss(in.fine_logits, in.p_t, w.raw_sum), w.distilling.weight);
    add(br.distil_coarse, distil_loss(in.coarse_logits, in.p_e, w.raw_sum), w.distilling.weight);
  }
  if (w.triplet.enabled) {
    add(br.triplet_fg, triplet_fg(in.e, in.bridged_fine, in.owners, w.margin, rng), w.triplet.weight);
    add(br.triplet_cg, triplet_cg(in.t, in.bridged_coarse, in.owners, w.margin, rng), w.triplet.weight);
  }
  if (w.alignment.enabled) add(br.align, alignment_loss(in.t, in.e, in.owners), w.alignment.weight);

  Var total = weighted[0];
  for (std::size_t i = 1; i < weighted.size(); ++i) total = ad::add(total, weighted[i]);
  out.total = total;
  br.total = total.item();
  return out;
}

}  // namespace jgkd::losses
