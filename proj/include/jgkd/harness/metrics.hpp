// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace jgkd::harness {

struct LabelScore {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t support = 0;  // gold count

  friend bool operator==(const LabelScore&, const LabelScore&) = default;
};

// Scores at one granularity (tokens or entities).
struct LevelMetrics {
  std::vector<LabelScore> per_label;
  // Pooled over every label except the excluded one.
  double micro_precision = 0;
  double micro_recall = 0;
  double micro_f1 = 0;

  friend bool operator==(const LevelMetrics&, const LevelMetrics&) = default;
};

struct Metrics {
  LevelMetrics token;
  LevelMetrics entity;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

// F1 = 2PR / (P + R), 0 when P + R = 0.
double f1_score(double precision, double recall);

// Per-label and micro scores from aligned gold/predicted label sequences.
// `excluded` (the schema's "other" label) is left out of the micro average
// but still gets its own per-label score.
LevelMetrics score_labels(std::span<const std::size_t> gold, std::span<const std::size_t> pred,
                          std::size_t num_labels, std::optional<std::size_t> excluded);

}  // namespace jgkd::harness
