// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jgkd/harness/training.hpp"

namespace jgkd::harness {

// Shared inputs of every run in a grid. Teachers are frozen and looked up by
// name; the pool must hold every teacher a grid row refers to.
struct AblationSetup {
  corpus::SchemaId schema = corpus::SchemaId::kFunsd;
  Corpus train;
  Corpus val;
  Corpus test;
  std::vector<teachers::Teacher> pool;
  student::StudentConfig student;  // base config; rosters are filled per row
  losses::LossWeights weights = losses::LossWeights::task_only();
  TrainSpec spec;
  std::vector<std::uint64_t> seeds{1};
  std::size_t threads = 1;

  const teachers::Teacher& teacher(const std::string& name) const;  // throws ConfigError
  TeacherSet teacher_set(const std::vector<std::string>& fine, const std::vector<std::string>& coarse) const;
};

struct LossCombo {
  std::string name;                   // e.g. "sim+distil"
  std::vector<std::string> families;  // subset of sim, distil, triplet, align
};

struct Roster {
  std::string name;  // e.g. "fine_a|coarse_a+coarse_b"
  std::vector<std::string> fine;
  std::vector<std::string> coarse;
};

struct ArchitectureRow {
  std::string name;  // JG-E, JG-D, JG-E&D, MT-JG-E&D
  student::Variant variant;
  Roster roster;
};

// The twelve Sim/Distil/Triplet/Align combinations: singles, pairs, triples, all four.
std::vector<LossCombo> default_loss_combos();
// Parses "sim+distil" style names; throws ValidationError on unknown families.
LossCombo parse_loss_combo(const std::string& name);
// Single and mixed fine/coarse rosters over the default teachers plus "transformer".
std::vector<Roster> default_rosters();
std::vector<ArchitectureRow> default_architectures();

struct RunResult {
  std::string config;
  std::uint64_t seed = 0;
  Metrics test;
  std::size_t best_epoch = 0;
  std::uint64_t teacher_checksum_before = 0;
  std::uint64_t teacher_checksum_after = 0;

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

struct AblationRow {
  std::string config;
  Metrics median;                // elementwise median over runs
  std::vector<RunResult> runs;   // one per seed, in seed order

  friend bool operator==(const AblationRow&, const AblationRow&) = default;
};

struct AblationReport {
  std::string kind;  // losses | teachers | architecture
  corpus::SchemaId schema = corpus::SchemaId::kFunsd;
  std::vector<AblationRow> rows;

  friend bool operator==(const AblationReport&, const AblationReport&) = default;
};

// Elementwise median; even counts average the middle pair.
Metrics median_metrics(const std::vector<Metrics>& runs);

// Trains the losses on top of setup.weights' task terms and the 2+2 default roster.
AblationReport ablate_losses(const AblationSetup& setup, const std::vector<LossCombo>& combos);
AblationReport ablate_teachers(const AblationSetup& setup, const std::vector<Roster>& rosters);
AblationReport ablate_architecture(const AblationSetup& setup, const std::vector<ArchitectureRow>& rows);

}  // namespace jgkd::harness
