// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "jgkd/ad/adam.hpp"
#include "jgkd/harness/metrics.hpp"
#include "jgkd/harness/objective.hpp"

namespace jgkd::harness {

using corpus::Corpus;

struct TrainSpec {
  ad::AdamConfig adam;
  std::size_t max_epochs = 50;
  std::size_t patience = 10;  // epochs without validation improvement before stopping
  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError
};

// Frozen teachers feeding a student, in roster order.
struct TeacherSet {
  std::vector<teachers::Teacher> fine;
  std::vector<teachers::Teacher> coarse;

  // Concatenated parameter checksum of every teacher.
  std::uint64_t checksum() const;
  student::TeacherOutputs outputs(const corpus::DocumentPage& page) const;
};

// Fills roster dims, names and label count of `base` from the teacher set.
student::StudentConfig configure_student(student::StudentConfig base, const TeacherSet& teachers,
                                         corpus::SchemaId schema);

// Teacher outputs for every page of a corpus, computed once.
std::vector<student::TeacherOutputs> cache_outputs(const TeacherSet& teachers, const Corpus& corpus);

struct StepRecord {
  std::size_t epoch = 0;
  std::string page_id;
  losses::LossBreakdown breakdown;
};

struct EpochRecord {
  std::size_t epoch = 0;
  losses::LossBreakdown mean;  // per-part mean over the epoch's steps
  double val_token_f1 = 0;
  double val_entity_f1 = 0;
  bool improved = false;
};

struct History {
  double initial_val_token_f1 = 0;
  std::vector<EpochRecord> epochs;
  std::vector<StepRecord> steps;
};

struct TrainResult {
  student::Student student;  // parameters of the best validation epoch
  History history;
  std::size_t best_epoch = 0;  // 0 = initialization
  double best_val_f1 = 0;
};

// Adam over shuffled single-page steps with early stopping on validation
// token micro-F1. The teachers' checksum is verified after every step.
// Throws NumericError naming epoch and page if the loss turns non-finite.
TrainResult train_student(const Corpus& train, const Corpus& val, const TeacherSet& teachers,
                          const student::StudentConfig& config, const losses::LossWeights& weights,
                          const TrainSpec& spec);

// Argmax token and entity predictions scored per label and overall.
Metrics evaluate(const student::Student& s, std::span<const student::TeacherOutputs> outputs, const Corpus& split);
Metrics evaluate(const student::Student& s, const TeacherSet& teachers, const Corpus& split);

// One JSON object per epoch.
void write_history(const History& history, const std::filesystem::path& path);

}  // namespace jgkd::harness
