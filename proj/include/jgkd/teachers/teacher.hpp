// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jgkd/corpus/document.hpp"
#include "jgkd/nn/layers.hpp"

namespace jgkd::teachers {

using corpus::Corpus;
using corpus::DocumentPage;

// Fine teachers label tokens, coarse teachers label entities.
enum class Grain { kFine = 1, kCoarse = 2 };

const char* grain_name(Grain g);

// Layout input of both teacher kinds: the four box coordinates followed by
// sin and cos of each coordinate at kBoxFrequencies octaves of pi.
inline constexpr std::size_t kBoxFrequencies = 6;
inline constexpr std::size_t kBoxFeatures = 4 + 4 * 2 * kBoxFrequencies;
void box_features(const corpus::BBox& box, std::span<double> out);

struct TeacherConfig {
  std::string name = "teacher";
  Grain grain = Grain::kFine;
  corpus::SchemaId schema = corpus::SchemaId::kFunsd;
  std::size_t dim = 48;
  std::size_t layers = 1;
  std::size_t heads = 4;
  std::size_t ff_dim = 0;  // 0 = 2 * dim
  std::size_t vocab_size = 200;
  std::size_t visual_dim = 16;
  bool use_box = true;
  bool use_position = false;  // fine: sinusoidal token positions
  bool use_visual = false;    // coarse: entity visual features
  double lr = 3e-3;
  std::size_t epochs = 15;
  std::uint64_t seed = 1;

  // Throws ConfigError naming the first bad field.
  void validate() const;
};

// Last-layer hidden states and per-item logits for one page.
struct TeacherOutput {
  ad::Tensor hidden;  // [k x d] fine, [n x d] coarse
  ad::Tensor logits;  // [k x C] fine, [n x C] coarse
};

// A small transformer classifier. Fine teachers embed each token (text
// embedding + box map, optionally positions); coarse teachers embed each
// entity from its mean token embedding, box and, optionally, visual vector.
class Teacher {
 public:
  explicit Teacher(const TeacherConfig& config);

  const TeacherConfig& config() const { return cfg_; }
  Grain grain() const { return cfg_.grain; }
  std::size_t dim() const { return cfg_.dim; }
  std::size_t num_labels() const;

  bool frozen() const { return frozen_; }
  void freeze() { frozen_ = true; }

  // Pure function of (parameters, page). Throws SchemaError when the page
  // schema differs from the teacher's.
  TeacherOutput infer(const DocumentPage& page) const;
  // Graph-building forward; returns (hidden, logits).
  std::pair<ad::Var, ad::Var> forward(nn::Binder& b, const DocumentPage& page) const;
  // Gold labels at this teacher's grain.
  std::vector<std::size_t> targets(const DocumentPage& page) const;

  ad::ParamSet& params();  // throws ContractError when frozen
  const ad::ParamSet& params() const { return params_; }
  std::uint64_t checksum() const { return params_.checksum(); }

 private:
  TeacherConfig cfg_;
  ad::ParamSet params_;
  bool frozen_ = false;
  std::size_t embed_ = 0;
  nn::Linear box_;
  nn::Linear input_;
  std::vector<nn::EncoderLayer> layers_;
  nn::Linear head_;
};

struct TeacherEpoch {
  std::size_t epoch = 0;
  double loss = 0;
  double train_f1 = 0;  // micro-F1 excluding "other"
};

struct TrainedTeacher {
  Teacher teacher;
  std::vector<TeacherEpoch> history;
};

// Per-item cross-entropy with Adam, one page per step, then freeze.
// Throws ValidationError on an empty corpus.
TrainedTeacher train_teacher(const Corpus& corpus, const TeacherConfig& config);
TrainedTeacher train_fine_teacher(const Corpus& corpus, TeacherConfig config);
TrainedTeacher train_coarse_teacher(const Corpus& corpus, TeacherConfig config);

// Micro-F1 (excluding "other") of argmax predictions over a corpus.
double teacher_f1(const Teacher& teacher, const Corpus& corpus);
// Token-level micro-F1; coarse teachers label tokens through their entity.
double teacher_token_f1(const Teacher& teacher, const Corpus& corpus);

void save_teacher(const Teacher& teacher, const std::filesystem::path& path);
// Throws FormatError on damaged files and on a grain mismatch.
Teacher load_teacher(const std::filesystem::path& path, Grain expected);

// Two fine (text+box+position at 48, text+box at 40) and two coarse
// (with visual at 32, without at 24) teachers.
std::vector<TeacherConfig> default_roster(corpus::SchemaId schema, std::uint64_t seed);
// Untrained coarse transformer baseline.
TeacherConfig random_coarse_config(corpus::SchemaId schema, std::uint64_t seed);

}  // namespace jgkd::teachers
