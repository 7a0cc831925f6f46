// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "jgkd/student/student.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numeric>

#include "jgkd/errors.hpp"
#include "jgkd/io/checkpoint.hpp"

namespace jgkd::student {

namespace {

constexpr double kStudentKind = 3.0;

std::size_t sum(const std::vector<std::size_t>& v) { return std::accumulate(v.begin(), v.end(), std::size_t{0}); }

Var concat_hidden(ad::Tape& tape, const std::vector<TeacherOutput>& outs, const std::vector<std::size_t>& dims,
                  const char* grain) {
  if (outs.size() != dims.size()) {
    throw ShapeError(std::string(grain) + " roster has " + std::to_string(dims.size()) + " teachers, got " +
                     std::to_string(outs.size()) + " outputs");
  }
  std::vector<Var> parts;
  for (std::size_t i = 0; i < outs.size(); ++i) {
    const Tensor& h = outs[i].hidden;
    if (h.cols() != dims[i] || h.rows() != outs[0].hidden.rows()) {
      throw ShapeError(std::string(grain) + " teacher " + std::to_string(i) + " hidden is " + ad::shape_str(h.shape()) +
                       ", expected " + std::to_string(outs[0].hidden.rows()) + " rows of width " +
                       std::to_string(dims[i]));
    }
    parts.push_back(tape.constant(h));
  }
  return parts.size() == 1 ? parts[0] : ad::concat_cols(parts);
}

}  // namespace

Variant parse_variant(std::string_view name) {
  if (name == "encoder_only") return Variant::kEncoderOnly;
  if (name == "decoder_only") return Variant::kDecoderOnly;
  if (name == "encoder_and_decoder") return Variant::kEncoderDecoder;
  throw ConfigError("unknown variant '" + std::string(name) +
                    "' (expected encoder_only, decoder_only or encoder_and_decoder)");
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kEncoderOnly:
      return "encoder_only";
    case Variant::kDecoderOnly:
      return "decoder_only";
    case Variant::kEncoderDecoder:
      break;
  }
  return "encoder_and_decoder";
}

void StudentConfig::validate() const {
  if (dim == 0) throw ConfigError("student dim must be positive");
  if (heads == 0 || dim % heads != 0) {
    throw ConfigError("student dim " + std::to_string(dim) + " is not divisible by " + std::to_string(heads) +
                      " heads");
  }
  if (num_labels < 1) throw ConfigError("student needs at least one label");
  if (fine_dims.empty()) throw ConfigError("student fine-teacher roster is empty");
  if (coarse_dims.empty()) throw ConfigError("student coarse-teacher roster is empty");
  for (std::size_t d : fine_dims)
    if (d == 0) throw ConfigError("fine teacher dim must be positive");
  for (std::size_t d : coarse_dims)
    if (d == 0) throw ConfigError("coarse teacher dim must be positive");
  if (!fine_names.empty() && fine_names.size() != fine_dims.size()) throw ConfigError("fine roster names/dims differ");
  if (!coarse_names.empty() && coarse_names.size() != coarse_dims.size()) {
    throw ConfigError("coarse roster names/dims differ");
  }
}

TeacherOutputs collect_outputs(const corpus::DocumentPage& page, std::span<const teachers::Teacher> fine,
                               std::span<const teachers::Teacher> coarse) {
  TeacherOutputs out;
  for (const auto& t : fine) {
    if (t.grain() != teachers::Grain::kFine) throw ConfigError("'" + t.config().name + "' is not a fine teacher");
    out.fine.push_back(t.infer(page));
  }
  for (const auto& t : coarse) {
    if (t.grain() != teachers::Grain::kCoarse) throw ConfigError("'" + t.config().name + "' is not a coarse teacher");
    out.coarse.push_back(t.infer(page));
  }
  return out;
}

Student::Student(const StudentConfig& config) : cfg_(config) {
  cfg_.validate();
  if (cfg_.ff_dim == 0) cfg_.ff_dim = 4 * cfg_.dim;
  const std::size_t d = cfg_.dim;
  Rng rng(cfg_.seed);

  fine_proj_ = nn::Linear::create(params_, "proj.fine", sum(cfg_.fine_dims), d, rng);
  fine_norm_ = nn::LayerNorm::create(params_, "proj.fine.norm", d);
  coarse_proj_ = nn::Linear::create(params_, "proj.coarse", sum(cfg_.coarse_dims), d, rng);
  coarse_norm_ = nn::LayerNorm::create(params_, "proj.coarse.norm", d);

  if (cfg_.has_encoder()) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(d));
    grain_embed_ = params_.add("grain_embed", uniform_tensor(rng, {2, d}, -bound, bound));
    for (std::size_t l = 0; l < cfg_.encoder_layers; ++l) {
      encoder_.push_back(nn::EncoderLayer::create(params_, "enc" + std::to_string(l), d, cfg_.heads, cfg_.ff_dim, rng));
    }
  }
  if (cfg_.has_decoders()) {
    for (std::size_t l = 0; l < cfg_.decoder_layers; ++l) {
      fine_decoder_.push_back(nn::DecoderLayer::create(params_, "dec.fine" + std::to_string(l), d, cfg_.heads,
                                                       cfg_.ff_dim, cfg_.cross_attention, rng));
    }
    for (std::size_t l = 0; l < cfg_.decoder_layers; ++l) {
      coarse_decoder_.push_back(nn::DecoderLayer::create(params_, "dec.coarse" + std::to_string(l), d, cfg_.heads,
                                                         cfg_.ff_dim, cfg_.cross_attention, rng));
    }
  }
  token_head_ = nn::Linear::create(params_, "head.token", d, cfg_.num_labels, rng);
  entity_head_ = nn::Linear::create(params_, "head.entity", d, cfg_.num_labels, rng);

  if (cfg_.fine_dims.size() >= 2) {
    for (std::size_t i = 0; i < cfg_.fine_dims.size(); ++i) {
      fine_bridges_.push_back(
          nn::Linear::create(params_, "bridge.fine" + std::to_string(i), cfg_.fine_dims[i], d, rng));
    }
  }
  if (cfg_.coarse_dims.size() >= 2) {
    for (std::size_t i = 0; i < cfg_.coarse_dims.size(); ++i) {
      coarse_bridges_.push_back(
          nn::Linear::create(params_, "bridge.coarse" + std::to_string(i), cfg_.coarse_dims[i], d, rng));
    }
  }
}

std::pair<Var, Var> Student::project(nn::Binder& b, const TeacherOutputs& outputs) const {
  Var fine = concat_hidden(b.tape(), outputs.fine, cfg_.fine_dims, "fine");
  Var coarse = concat_hidden(b.tape(), outputs.coarse, cfg_.coarse_dims, "coarse");
  return {fine_norm_(b, fine_proj_(b, fine)), coarse_norm_(b, coarse_proj_(b, coarse))};
}

std::pair<Var, Var> Student::joint_encode(nn::Binder& b, Var t_hat, Var e_hat) const {
  if (!cfg_.has_encoder()) throw ContractError("student variant has no encoder");
  const std::size_t k = t_hat.rows();
  const std::size_t n = e_hat.rows();
  Var g = b(grain_embed_);
  Var tok = ad::add_bias(t_hat, ad::slice_rows(g, 0, 1));
  Var ent = ad::add_bias(e_hat, ad::slice_rows(g, 1, 1));
  if (cfg_.positions) {
    tok = ad::add(tok, b.tape().constant(nn::sinusoidal_positions(k, cfg_.dim)));
    ent = ad::add(ent, b.tape().constant(nn::sinusoidal_positions(n, cfg_.dim)));
  }
  const std::array<Var, 2> parts{tok, ent};
  Var x = ad::concat_rows(parts);

  ad::AttentionMask mask;
  if (cfg_.mask_cross_grain) {
    const std::size_t L = k + n;
    mask = ad::AttentionMask{L, L, std::vector<std::uint8_t>(L * L, 0)};
    for (std::size_t r = 0; r < L; ++r)
      for (std::size_t c = 0; c < L; ++c) mask.allowed[r * L + c] = (r < k) == (c < k);
  }
  for (const auto& layer : encoder_) x = layer(b, x, cfg_.mask_cross_grain ? &mask : nullptr);
  return {ad::slice_rows(x, 0, k), ad::slice_rows(x, k, n)};
}

Var Student::encode_grain(nn::Binder& b, Var x, std::size_t grain) const {
  if (!cfg_.has_encoder()) throw ContractError("student variant has no encoder");
  if (grain > 1) throw IndexError("grain must be 0 (tokens) or 1 (entities)");
  x = ad::add_bias(x, ad::slice_rows(b(grain_embed_), grain, 1));
  if (cfg_.positions) x = ad::add(x, b.tape().constant(nn::sinusoidal_positions(x.rows(), cfg_.dim)));
  for (const auto& layer : encoder_) x = layer(b, x);
  return x;
}

Var Student::fine_decode(nn::Binder& b, Var tokens, Var entity_memory) const {
  if (!cfg_.has_decoders()) throw ContractError("student variant has no decoders");
  for (const auto& layer : fine_decoder_) tokens = layer(b, tokens, entity_memory);
  return tokens;
}

Var Student::coarse_decode(nn::Binder& b, Var entities, Var token_memory) const {
  if (!cfg_.has_decoders()) throw ContractError("student variant has no decoders");
  for (const auto& layer : coarse_decoder_) entities = layer(b, entities, token_memory);
  return entities;
}

ForwardVars Student::forward(nn::Binder& b, const TeacherOutputs& outputs) const {
  ForwardVars v;
  std::tie(v.t_hat, v.e_hat) = project(b, outputs);
  if (cfg_.has_encoder()) {
    std::tie(v.t_enc, v.e_enc) = joint_encode(b, v.t_hat, v.e_hat);
  } else {
    v.t_enc = v.t_hat;
    v.e_enc = v.e_hat;
  }
  if (cfg_.has_decoders()) {
    v.t = fine_decode(b, v.t_enc, v.e_enc);
    v.e = coarse_decode(b, v.e_enc, v.t_enc);
  } else {
    v.t = v.t_enc;
    v.e = v.e_enc;
  }
  v.p_t = token_head_(b, v.t);
  v.p_e = entity_head_(b, v.e);
  v.p_align = ad::matmul(v.t, ad::transpose(v.e));
  return v;
}

ForwardTrace Student::trace(const TeacherOutputs& outputs) const {
  ad::Tape tape;
  nn::Binder b(tape, params_);
  const ForwardVars v = forward(b, outputs);
  return ForwardTrace{v.t_hat.value(), v.e_hat.value(), v.t_enc.value(), v.e_enc.value(), v.t.value(),
                      v.e.value(),     v.p_t.value(),   v.p_e.value(),   v.p_align.value()};
}

Var Student::bridge_fine(nn::Binder& b, std::size_t teacher, const Tensor& hidden) const {
  if (teacher >= fine_bridges_.size()) throw IndexError("no fine bridge for teacher " + std::to_string(teacher));
  return fine_bridges_[teacher](b, b.tape().constant(hidden));
}

Var Student::bridge_coarse(nn::Binder& b, std::size_t teacher, const Tensor& hidden) const {
  if (teacher >= coarse_bridges_.size()) throw IndexError("no coarse bridge for teacher " + std::to_string(teacher));
  return coarse_bridges_[teacher](b, b.tape().constant(hidden));
}

void save_student(const Student& s, const std::filesystem::path& path) {
  const StudentConfig& c = s.config();
  io::ArrayWriter w;
  w.meta("kind", kStudentKind);
  w.meta("variant", static_cast<double>(c.variant));
  w.meta("dim", static_cast<double>(c.dim));
  w.meta("encoder_layers", static_cast<double>(c.encoder_layers));
  w.meta("decoder_layers", static_cast<double>(c.decoder_layers));
  w.meta("heads", static_cast<double>(c.heads));
  w.meta("ff_dim", static_cast<double>(c.ff_dim));
  w.meta("num_labels", static_cast<double>(c.num_labels));
  w.meta("mask_cross_grain", c.mask_cross_grain);
  w.meta("cross_attention", c.cross_attention);
  w.meta("positions", c.positions);
  w.meta("seed", std::bit_cast<double>(c.seed));
  for (std::size_t i = 0; i < c.fine_dims.size(); ++i) {
    w.meta("fine_dim/" + std::to_string(i) + "/" + (c.fine_names.empty() ? "" : c.fine_names[i]),
           static_cast<double>(c.fine_dims[i]));
  }
  for (std::size_t i = 0; i < c.coarse_dims.size(); ++i) {
    w.meta("coarse_dim/" + std::to_string(i) + "/" + (c.coarse_names.empty() ? "" : c.coarse_names[i]),
           static_cast<double>(c.coarse_dims[i]));
  }
  w.params("params", s.params());
  io::write_arrays(path, w.arrays());
}

Student load_student(const std::filesystem::path& path) {
  io::ArrayReader r(io::read_arrays(path));
  if (r.meta("kind") != kStudentKind) throw FormatError("'" + path.string() + "' is not a student checkpoint");
  StudentConfig c;
  c.variant = static_cast<Variant>(static_cast<int>(r.meta("variant")));
  c.dim = static_cast<std::size_t>(r.meta("dim"));
  c.encoder_layers = static_cast<std::size_t>(r.meta("encoder_layers"));
  c.decoder_layers = static_cast<std::size_t>(r.meta("decoder_layers"));
  c.heads = static_cast<std::size_t>(r.meta("heads"));
  c.ff_dim = static_cast<std::size_t>(r.meta("ff_dim"));
  c.num_labels = static_cast<std::size_t>(r.meta("num_labels"));
  c.mask_cross_grain = r.meta("mask_cross_grain") != 0.0;
  c.cross_attention = r.meta("cross_attention") != 0.0;
  c.positions = r.meta("positions") != 0.0;
  c.seed = std::bit_cast<std::uint64_t>(r.meta("seed"));
  c.fine_names = r.names("fine_dim");
  for (std::size_t i = 0; i < c.fine_names.size(); ++i) {
    c.fine_dims.push_back(static_cast<std::size_t>(r.meta("fine_dim/" + std::to_string(i) + "/" + c.fine_names[i])));
  }
  c.coarse_names = r.names("coarse_dim");
  for (std::size_t i = 0; i < c.coarse_names.size(); ++i) {
    c.coarse_dims.push_back(
        static_cast<std::size_t>(r.meta("coarse_dim/" + std::to_string(i) + "/" + c.coarse_names[i])));
  }
  if (std::all_of(c.fine_names.begin(), c.fine_names.end(), [](auto& s) { return s.empty(); })) c.fine_names.clear();
  if (std::all_of(c.coarse_names.begin(), c.coarse_names.end(), [](auto& s) { return s.empty(); })) {
    c.coarse_names.clear();
  }
  Student s(c);
  r.load_params("params", s.params());
  return s;
}

}  // namespace jgkd::student
