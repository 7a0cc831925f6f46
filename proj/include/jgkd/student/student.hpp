// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "jgkd/nn/layers.hpp"
#include "jgkd/teachers/teacher.hpp"

namespace jgkd::student {

using ad::Tensor;
using ad::Var;
using teachers::TeacherOutput;

enum class Variant { kEncoderOnly, kDecoderOnly, kEncoderDecoder };

Variant parse_variant(std::string_view name);  // encoder_only | decoder_only | encoder_and_decoder
const char* variant_name(Variant v);

struct StudentConfig {
  Variant variant = Variant::kEncoderDecoder;
  std::size_t dim = 64;
  std::size_t encoder_layers = 2;
  std::size_t decoder_layers = 2;
  std::size_t heads = 4;
  std::size_t ff_dim = 0;  // 0 = 4 * dim
  std::size_t num_labels = 4;
  std::vector<std::size_t> fine_dims;    // hidden dim of each fine teacher in the roster
  std::vector<std::size_t> coarse_dims;  // hidden dim of each coarse teacher in the roster
  std::vector<std::string> fine_names;   // roster names, informational (may be empty)
  std::vector<std::string> coarse_names;
  bool mask_cross_grain = false;         // encoder: tokens and entities attend only within their grain
  bool cross_attention = true;           // decoders: attend to the other grain's memory
  bool positions = false;                // add sinusoidal positions per grain before the encoder
  std::uint64_t seed = 1;

  bool has_encoder() const { return variant != Variant::kDecoderOnly; }
  bool has_decoders() const { return variant != Variant::kEncoderOnly; }
  // Throws ConfigError naming the first bad field.
  void validate() const;
};

// Teacher outputs feeding one page, in roster order.
struct TeacherOutputs {
  std::vector<TeacherOutput> fine;
  std::vector<TeacherOutput> coarse;
};

TeacherOutputs collect_outputs(const corpus::DocumentPage& page, std::span<const teachers::Teacher> fine,
                               std::span<const teachers::Teacher> coarse);

// Graph handles of one forward pass. Without an encoder, the encoder
// outputs are the projections; without decoders, the decoder outputs are
// the encoder outputs.
struct ForwardVars {
  Var t_hat, e_hat;  // projections [k x d], [n x d]
  Var t_enc, e_enc;  // encoder outputs
  Var t, e;          // decoder outputs, fed to the heads
  Var p_t, p_e;      // logits [k x C], [n x C]
  Var p_align;       // t x E^T [k x n]
};

struct ForwardTrace {
  Tensor t_hat, e_hat, t_enc, e_enc, t, e, p_t, p_e, p_align;
};

// Joint-grained student: per-grain projection of concatenated teacher
// hidden states, joint encoder over tokens and entities, fine and coarse
// decoders that use the other grain as memory, and per-grain heads.
class Student {
 public:
  explicit Student(const StudentConfig& config);

  const StudentConfig& config() const { return cfg_; }
  ad::ParamSet& params() { return params_; }
  const ad::ParamSet& params() const { return params_; }

  std::pair<Var, Var> project(nn::Binder& b, const TeacherOutputs& outputs) const;
  std::pair<Var, Var> joint_encode(nn::Binder& b, Var t_hat, Var e_hat) const;
  // The encoder stack run on one grain alone (grain 0 tokens, 1 entities);
  // equals joint_encode with cross-grain masking.
  Var encode_grain(nn::Binder& b, Var x, std::size_t grain) const;
  Var fine_decode(nn::Binder& b, Var tokens, Var entity_memory) const;
  Var coarse_decode(nn::Binder& b, Var entities, Var token_memory) const;
  ForwardVars forward(nn::Binder& b, const TeacherOutputs& outputs) const;
  ForwardTrace trace(const TeacherOutputs& outputs) const;

  // Maps teacher i's hidden states into the student dimension. Present only
  // for a grain whose roster has at least two teachers.
  bool has_fine_bridges() const { return !fine_bridges_.empty(); }
  bool has_coarse_bridges() const { return !coarse_bridges_.empty(); }
  Var bridge_fine(nn::Binder& b, std::size_t teacher, const Tensor& hidden) const;
  Var bridge_coarse(nn::Binder& b, std::size_t teacher, const Tensor& hidden) const;

 private:
  StudentConfig cfg_;
  ad::ParamSet params_;
  nn::Linear fine_proj_, coarse_proj_;
  nn::LayerNorm fine_norm_, coarse_norm_;
  std::size_t grain_embed_ = 0;
  std::vector<nn::EncoderLayer> encoder_;
  std::vector<nn::DecoderLayer> fine_decoder_, coarse_decoder_;
  nn::Linear token_head_, entity_head_;
  std::vector<nn::Linear> fine_bridges_, coarse_bridges_;
};

void save_student(const Student& student, const std::filesystem::path& path);
// Throws FormatError on damaged files or non-student checkpoints.
Student load_student(const std::filesystem::path& path);

}  // namespace jgkd::student
