// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "jgkd/harness/metrics.hpp"

#include "jgkd/errors.hpp"

namespace jgkd::harness {

double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

LevelMetrics score_labels(std::span<const std::size_t> gold, std::span<const std::size_t> pred,
                          std::size_t num_labels, std::optional<std::size_t> excluded) {
  if (gold.size() != pred.size()) {
    throw ShapeError("score_labels: " + std::to_string(gold.size()) + " gold labels vs " +
                     std::to_string(pred.size()) + " predictions");
  }
  std::vector<std::size_t> tp(num_labels, 0), fp(num_labels, 0), fn(num_labels, 0);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] >= num_labels || pred[i] >= num_labels) throw IndexError("score_labels: label out of range");
    if (gold[i] == pred[i]) {
      ++tp[gold[i]];
    } else {
      ++fp[pred[i]];
      ++fn[gold[i]];
    }
  }
  auto ratio = [](std::size_t a, std::size_t b) { return b ? static_cast<double>(a) / static_cast<double>(b) : 0.0; };

  LevelMetrics m;
  std::size_t all_tp = 0, all_fp = 0, all_fn = 0;
  for (std::size_t c = 0; c < num_labels; ++c) {
    LabelScore s;
    s.precision = ratio(tp[c], tp[c] + fp[c]);
    s.recall = ratio(tp[c], tp[c] + fn[c]);
    s.f1 = f1_score(s.precision, s.recall);
    s.support = tp[c] + fn[c];
    m.per_label.push_back(s);
    if (excluded && *excluded == c) continue;
    all_tp += tp[c];
    all_fp += fp[c];
    all_fn += fn[c];
  }
  m.micro_precision = ratio(all_tp, all_tp + all_fp);
  m.micro_recall = ratio(all_tp, all_tp + all_fn);
  m.micro_f1 = f1_score(m.micro_precision, m.micro_recall);
  return m;
}

}  // namespace jgkd::harness
