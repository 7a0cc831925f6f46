// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "jgkd/harness/training.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <json.hpp>
#include <numeric>

#include "jgkd/errors.hpp"

namespace jgkd::harness {

using losses::LossBreakdown;

namespace {

constexpr std::optional<double> LossBreakdown::*kParts[] = {
    &LossBreakdown::task_fine,   &LossBreakdown::task_coarse,   &LossBreakdown::sim_fine,
    &LossBreakdown::sim_coarse,  &LossBreakdown::distil_fine,   &LossBreakdown::distil_coarse,
    &LossBreakdown::triplet_fg,  &LossBreakdown::triplet_cg,    &LossBreakdown::align};

LossBreakdown mean_breakdown(std::span<const StepRecord> steps) {
  LossBreakdown m;
  if (steps.empty()) return m;
  const double n = static_cast<double>(steps.size());
  for (auto part : kParts) {
    if (!(steps[0].breakdown.*part)) continue;
    double s = 0;
    for (const auto& st : steps) s += *(st.breakdown.*part);
    m.*part = s / n;
  }
  double total = 0;
  for (const auto& st : steps) total += st.breakdown.total;
  m.total = total / n;
  return m;
}

std::size_t argmax(std::span<const double> row) {
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

}  // namespace

void TrainSpec::validate() const {
  if (!(adam.lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(adam.eps > 0.0)) throw ConfigError("Adam epsilon must be positive");
}

std::uint64_t TeacherSet::checksum() const {
  std::vector<double> sums;
  for (const auto& t : fine) sums.push_back(std::bit_cast<double>(t.checksum()));
  for (const auto& t : coarse) sums.push_back(std::bit_cast<double>(t.checksum()));
  return ad::checksum(sums);
}

student::TeacherOutputs TeacherSet::outputs(const corpus::DocumentPage& page) const {
  return student::collect_outputs(page, fine, coarse);
}

student::StudentConfig configure_student(student::StudentConfig base, const TeacherSet& teachers,
                                         corpus::SchemaId schema) {
  base.num_labels = corpus::schema(schema).num_labels();
  base.fine_dims.clear();
  base.coarse_dims.clear();
  base.fine_names.clear();
  base.coarse_names.clear();
  for (const auto& t : teachers.fine) {
    base.fine_dims.push_back(t.dim());
    base.fine_names.push_back(t.config().name);
  }
  for (const auto& t : teachers.coarse) {
    base.coarse_dims.push_back(t.dim());
    base.coarse_names.push_back(t.config().name);
  }
  return base;
}

std::vector<student::TeacherOutputs> cache_outputs(const TeacherSet& teachers, const Corpus& corpus) {
  std::vector<student::TeacherOutputs> out;
  out.reserve(corpus.size());
  for (const auto& page : corpus) out.push_back(teachers.outputs(page));
  return out;
}

Metrics evaluate(const student::Student& s, std::span<const student::TeacherOutputs> outputs, const Corpus& split) {
  if (split.empty()) throw ValidationError("cannot evaluate on an empty split");
  if (outputs.size() != split.size()) throw ShapeError("teacher output cache does not match the split");
  std::vector<std::size_t> tg, tp, eg, ep;
  for (std::size_t i = 0; i < split.size(); ++i) {
    const auto& page = split[i];
    const student::ForwardTrace tr = s.trace(outputs[i]);
    for (std::size_t r = 0; r < page.num_tokens(); ++r) tp.push_back(argmax(tr.p_t.row(r)));
    for (std::size_t r = 0; r < page.num_entities(); ++r) ep.push_back(argmax(tr.p_e.row(r)));
    const auto tl = page.token_labels();
    const auto el = page.entity_labels();
    tg.insert(tg.end(), tl.begin(), tl.end());
    eg.insert(eg.end(), el.begin(), el.end());
  }
  const auto& sc = corpus::schema(split.front().schema);
  return Metrics{score_labels(tg, tp, sc.num_labels(), sc.other_label()),
                 score_labels(eg, ep, sc.num_labels(), sc.other_label())};
}

Metrics evaluate(const student::Student& s, const TeacherSet& teachers, const Corpus& split) {
  const auto cache = cache_outputs(teachers, split);
  return evaluate(s, cache, split);
}

TrainResult train_student(const Corpus& train, const Corpus& val, const TeacherSet& teachers,
                          const student::StudentConfig& config, const losses::LossWeights& weights,
                          const TrainSpec& spec) {
  if (train.empty()) throw ValidationError("training split is empty");
  if (val.empty()) throw ValidationError("validation split is empty");
  spec.validate();
  check_loss_roster(config, weights);
  if (config.fine_dims.size() != teachers.fine.size() || config.coarse_dims.size() != teachers.coarse.size()) {
    throw ConfigError("student roster does not match the teacher set");
  }

  const auto train_cache = cache_outputs(teachers, train);
  const auto val_cache = cache_outputs(teachers, val);
  const std::uint64_t frozen = teachers.checksum();

  TrainResult result{student::Student(config), {}, 0, 0.0};
  student::Student current(config);
  ad::ParamSet& ps = current.params();
  ps.zero_grad();
  ad::Adam adam(ps, spec.adam);
  Rng loss_rng(derive_seed(spec.seed, 0x1055));

  result.best_val_f1 = evaluate(current, val_cache, val).token.micro_f1;
  result.history.initial_val_token_f1 = result.best_val_f1;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= spec.max_epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(spec.seed, epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    const std::size_t first_step = result.history.steps.size();
    for (std::size_t idx : order) {
      const auto& page = train[idx];
      ad::Tape tape;
      nn::Binder b(tape, ps);
      PageObjective obj;
      try {
        obj = page_objective(b, current, train_cache[idx], page, weights, loss_rng);
        tape.backward(obj.loss.total);
      } catch (const NumericError& e) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", page '" + page.id +
                           "': " + e.what());
      }
      adam.step(ps);
      for (const auto& p : ps) {
        if (!p.value.all_finite()) {
          throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", page '" + page.id +
                             "': parameter '" + p.name + "' is non-finite");
        }
      }
      if (teachers.checksum() != frozen) throw ContractError("teacher parameters changed during student training");
      result.history.steps.push_back(StepRecord{epoch, page.id, obj.loss.breakdown});
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.mean = mean_breakdown(std::span(result.history.steps).subspan(first_step));
    const Metrics m = evaluate(current, val_cache, val);
    rec.val_token_f1 = m.token.micro_f1;
    rec.val_entity_f1 = m.entity.micro_f1;
    if (rec.val_token_f1 > result.best_val_f1) {
      rec.improved = true;
      result.best_val_f1 = rec.val_token_f1;
      result.best_epoch = epoch;
      result.student = current;
      since_best = 0;
    } else {
      ++since_best;
    }
    result.history.epochs.push_back(rec);
    if (since_best >= spec.patience) break;
  }
  return result;
}

void write_history(const History& history, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  for (const auto& e : history.epochs) {
    nlohmann::ordered_json j;
    j["epoch"] = e.epoch;
    nlohmann::ordered_json parts;
    for (const auto& [name, v] : e.mean.parts()) parts[name] = v;
    parts["total"] = e.mean.total;
    j["loss"] = parts;
    j["val_token_f1"] = e.val_token_f1;
    j["val_entity_f1"] = e.val_entity_f1;
    j["improved"] = e.improved;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace jgkd::harness
