// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "jgkd/teachers/teacher.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>

#include "jgkd/ad/adam.hpp"
#include "jgkd/errors.hpp"
#include "jgkd/harness/metrics.hpp"
#include "jgkd/io/checkpoint.hpp"

namespace jgkd::teachers {

using ad::Tensor;
using ad::Var;

const char* grain_name(Grain g) { return g == Grain::kFine ? "fine" : "coarse"; }

void box_features(const corpus::BBox& box, std::span<double> out) {
  if (out.size() != kBoxFeatures) throw ShapeError("box_features: output width " + std::to_string(out.size()));
  const double coords[4] = {box.x0, box.y0, box.x1, box.y1};
  std::size_t at = 0;
  for (double c : coords) out[at++] = c;
  for (double c : coords) {
    for (std::size_t f = 0; f < kBoxFrequencies; ++f) {
      const double w = std::numbers::pi * static_cast<double>(1u << f);
      out[at++] = std::sin(w * c);
      out[at++] = std::cos(w * c);
    }
  }
}

void TeacherConfig::validate() const {
  auto bad = [&](const std::string& field) { throw ConfigError("teacher '" + name + "': invalid " + field); };
  if (dim == 0) bad("dim");
  if (heads == 0 || dim % heads != 0) bad("heads (must divide dim)");
  if (vocab_size == 0) bad("vocab_size");
  if (use_visual && visual_dim == 0) bad("visual_dim");
  if (!(lr > 0.0)) bad("lr");
}

Teacher::Teacher(const TeacherConfig& config) : cfg_(config) {
  cfg_.validate();
  if (cfg_.ff_dim == 0) cfg_.ff_dim = 2 * cfg_.dim;
  Rng rng(cfg_.seed);
  const std::size_t d = cfg_.dim;
  embed_ = params_.add("embed", uniform_tensor(rng, {cfg_.vocab_size, d}, -1.0, 1.0));
  if (cfg_.grain == Grain::kFine) {
    if (cfg_.use_box) box_ = nn::Linear::create(params_, "box", kBoxFeatures, d, rng);
  } else {
    std::size_t in = d + (cfg_.use_box ? kBoxFeatures : 0) + (cfg_.use_visual ? cfg_.visual_dim : 0);
    input_ = nn::Linear::create(params_, "input", in, d, rng);
  }
  for (std::size_t l = 0; l < cfg_.layers; ++l) {
    layers_.push_back(nn::EncoderLayer::create(params_, "layer" + std::to_string(l), d, cfg_.heads, cfg_.ff_dim, rng));
  }
  head_ = nn::Linear::create(params_, "head", d, num_labels(), rng);
}

std::size_t Teacher::num_labels() const { return corpus::schema(cfg_.schema).num_labels(); }

ad::ParamSet& Teacher::params() {
  if (frozen_) throw ContractError("teacher '" + cfg_.name + "' is frozen");
  return params_;
}

std::vector<std::size_t> Teacher::targets(const DocumentPage& page) const {
  return cfg_.grain == Grain::kFine ? page.token_labels() : page.entity_labels();
}

std::pair<Var, Var> Teacher::forward(nn::Binder& b, const DocumentPage& page) const {
  if (page.schema != cfg_.schema) {
    throw SchemaError("teacher '" + cfg_.name + "' was built for schema '" + corpus::schema(cfg_.schema).name +
                      "', page '" + page.id + "' uses '" + corpus::schema(page.schema).name + "'");
  }
  ad::Tape& tape = b.tape();
  const std::size_t k = page.num_tokens();
  const std::size_t n = page.num_entities();

  std::vector<std::size_t> ids(k);
  for (std::size_t i = 0; i < k; ++i) {
    ids[i] = page.tokens[i].text_id;
    if (ids[i] >= cfg_.vocab_size) {
      throw IndexError("page '" + page.id + "' token text_id " + std::to_string(ids[i]) + " exceeds vocabulary " +
                       std::to_string(cfg_.vocab_size));
    }
  }
  Var tok = ad::gather_rows(b(embed_), ids);

  Var x;
  if (cfg_.grain == Grain::kFine) {
    x = tok;
    if (cfg_.use_box) {
      Tensor boxes({k, kBoxFeatures});
      for (std::size_t i = 0; i < k; ++i) box_features(page.tokens[i].bbox, boxes.row(i));
      x = ad::add(x, box_(b, tape.constant(std::move(boxes))));
    }
    if (cfg_.use_position) x = ad::add(x, tape.constant(nn::sinusoidal_positions(k, cfg_.dim)));
  } else {
    Tensor pool({n, k});
    for (std::size_t e = 0; e < n; ++e) {
      const auto& ids_e = page.entities[e].token_ids;
      for (std::size_t t : ids_e) pool.at(e, t) = 1.0 / static_cast<double>(ids_e.size());
    }
    std::vector<Var> parts{ad::matmul(tape.constant(std::move(pool)), tok)};
    if (cfg_.use_box) {
      Tensor boxes({n, kBoxFeatures});
      for (std::size_t e = 0; e < n; ++e) box_features(page.entities[e].bbox, boxes.row(e));
      parts.push_back(tape.constant(std::move(boxes)));
    }
    if (cfg_.use_visual) {
      Tensor vis({n, cfg_.visual_dim});
      for (std::size_t e = 0; e < n; ++e) {
        const auto& v = page.entities[e].visual_feat;
        if (v.size() != cfg_.visual_dim) {
          throw ShapeError("page '" + page.id + "' visual features have " + std::to_string(v.size()) +
                           " dims, teacher '" + cfg_.name + "' expects " + std::to_string(cfg_.visual_dim));
        }
        std::copy(v.begin(), v.end(), vis.row(e).begin());
      }
      parts.push_back(tape.constant(std::move(vis)));
    }
    x = input_(b, ad::concat_cols(parts));
  }
  for (const auto& layer : layers_) x = layer(b, x);
  return {x, head_(b, x)};
}

TeacherOutput Teacher::infer(const DocumentPage& page) const {
  ad::Tape tape;
  nn::Binder b(tape, params_);
  auto [hidden, logits] = forward(b, page);
  return TeacherOutput{hidden.value(), logits.value()};
}

namespace {

std::vector<std::size_t> argmax_rows(const Tensor& logits) {
  std::vector<std::size_t> out(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto row = logits.row(r);
    out[r] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

}  // namespace

double teacher_f1(const Teacher& teacher, const Corpus& corpus) {
  std::vector<std::size_t> gold, pred;
  for (const auto& page : corpus) {
    auto g = teacher.targets(page);
    auto p = argmax_rows(teacher.infer(page).logits);
    gold.insert(gold.end(), g.begin(), g.end());
    pred.insert(pred.end(), p.begin(), p.end());
  }
  const auto& sc = corpus::schema(teacher.config().schema);
  return harness::score_labels(gold, pred, sc.num_labels(), sc.other_label()).micro_f1;
}

double teacher_token_f1(const Teacher& teacher, const Corpus& corpus) {
  if (teacher.grain() == Grain::kFine) return teacher_f1(teacher, corpus);
  std::vector<std::size_t> gold, pred;
  for (const auto& page : corpus) {
    const auto ent = argmax_rows(teacher.infer(page).logits);
    for (const auto& tok : page.tokens) {
      gold.push_back(page.entities[tok.entity_id].label);
      pred.push_back(ent[tok.entity_id]);
    }
  }
  const auto& sc = corpus::schema(teacher.config().schema);
  return harness::score_labels(gold, pred, sc.num_labels(), sc.other_label()).micro_f1;
}

TrainedTeacher train_teacher(const Corpus& corpus, const TeacherConfig& config) {
  if (corpus.empty()) throw ValidationError("cannot train teacher '" + config.name + "' on an empty corpus");
  TrainedTeacher out{Teacher(config), {}};
  Teacher& t = out.teacher;
  ad::ParamSet& ps = t.params();
  ps.zero_grad();
  ad::Adam adam(ps, ad::AdamConfig{.lr = config.lr});

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng(derive_seed(config.seed, 0x7ea0 + epoch));
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t idx : order) {
      const auto& page = corpus[idx];
      ad::Tape tape;
      nn::Binder b(tape, ps);
      auto [hidden, logits] = t.forward(b, page);
      const auto y = t.targets(page);
      Var loss = ad::cross_entropy_rows(logits, y);
      total += loss.item();
      tape.backward(loss);
      adam.step(ps);
    }
    out.history.push_back(
        TeacherEpoch{epoch + 1, total / static_cast<double>(corpus.size()), teacher_f1(t, corpus)});
  }
  t.freeze();
  return out;
}

TrainedTeacher train_fine_teacher(const Corpus& corpus, TeacherConfig config) {
  config.grain = Grain::kFine;
  return train_teacher(corpus, config);
}

TrainedTeacher train_coarse_teacher(const Corpus& corpus, TeacherConfig config) {
  config.grain = Grain::kCoarse;
  return train_teacher(corpus, config);
}

void save_teacher(const Teacher& teacher, const std::filesystem::path& path) {
  const TeacherConfig& c = teacher.config();
  io::ArrayWriter w;
  w.meta("kind", static_cast<double>(c.grain));
  w.meta("name/0/" + c.name, 0.0);
  w.meta("schema", static_cast<double>(c.schema));
  w.meta("dim", static_cast<double>(c.dim));
  w.meta("layers", static_cast<double>(c.layers));
  w.meta("heads", static_cast<double>(c.heads));
  w.meta("ff_dim", static_cast<double>(c.ff_dim));
  w.meta("vocab_size", static_cast<double>(c.vocab_size));
  w.meta("visual_dim", static_cast<double>(c.visual_dim));
  w.meta("use_box", c.use_box);
  w.meta("use_position", c.use_position);
  w.meta("use_visual", c.use_visual);
  w.meta("lr", c.lr);
  w.meta("epochs", static_cast<double>(c.epochs));
  w.meta("seed", std::bit_cast<double>(c.seed));
  w.meta("frozen", teacher.frozen());
  w.params("params", teacher.params());
  io::write_arrays(path, w.arrays());
}

Teacher load_teacher(const std::filesystem::path& path, Grain expected) {
  io::ArrayReader r(io::read_arrays(path));
  const auto kind = static_cast<int>(r.meta("kind"));
  if (kind != static_cast<int>(Grain::kFine) && kind != static_cast<int>(Grain::kCoarse)) {
    throw FormatError("'" + path.string() + "' is not a teacher checkpoint (kind tag " + std::to_string(kind) + ")");
  }
  if (kind != static_cast<int>(expected)) {
    throw FormatError("'" + path.string() + "' holds a " + grain_name(static_cast<Grain>(kind)) +
                      " teacher, expected a " + grain_name(expected) + " teacher");
  }
  TeacherConfig c;
  const auto names = r.names("name");
  if (names.size() != 1) throw FormatError("'" + path.string() + "' has no teacher name");
  c.name = names[0];
  c.grain = expected;
  c.schema = static_cast<corpus::SchemaId>(static_cast<int>(r.meta("schema")));
  c.dim = static_cast<std::size_t>(r.meta("dim"));
  c.layers = static_cast<std::size_t>(r.meta("layers"));
  c.heads = static_cast<std::size_t>(r.meta("heads"));
  c.ff_dim = static_cast<std::size_t>(r.meta("ff_dim"));
  c.vocab_size = static_cast<std::size_t>(r.meta("vocab_size"));
  c.visual_dim = static_cast<std::size_t>(r.meta("visual_dim"));
  c.use_box = r.meta("use_box") != 0.0;
  c.use_position = r.meta("use_position") != 0.0;
  c.use_visual = r.meta("use_visual") != 0.0;
  c.lr = r.meta("lr");
  c.epochs = static_cast<std::size_t>(r.meta("epochs"));
  c.seed = std::bit_cast<std::uint64_t>(r.meta("seed"));
  Teacher t(c);
  r.load_params("params", t.params());
  if (r.meta("frozen") != 0.0) t.freeze();
  return t;
}

std::vector<TeacherConfig> default_roster(corpus::SchemaId schema, std::uint64_t seed) {
  TeacherConfig fa;
  fa.name = "fine_a";
  fa.grain = Grain::kFine;
  fa.dim = 48;
  fa.use_position = true;
  TeacherConfig fb;
  fb.name = "fine_b";
  fb.grain = Grain::kFine;
  fb.dim = 40;
  TeacherConfig ca;
  ca.name = "coarse_a";
  ca.grain = Grain::kCoarse;
  ca.dim = 32;
  ca.use_visual = true;
  TeacherConfig cb;
  cb.name = "coarse_b";
  cb.grain = Grain::kCoarse;
  cb.dim = 24;
  std::vector<TeacherConfig> roster{fa, fb, ca, cb};
  for (std::size_t i = 0; i < roster.size(); ++i) {
    roster[i].schema = schema;
    roster[i].seed = derive_seed(seed, 0x7eac0 + i);
  }
  return roster;
}

TeacherConfig random_coarse_config(corpus::SchemaId schema, std::uint64_t seed) {
  TeacherConfig c;
  c.name = "transformer";
  c.grain = Grain::kCoarse;
  c.schema = schema;
  c.dim = 32;
  c.use_visual = true;
  c.epochs = 0;
  c.seed = derive_seed(seed, 0x7eacf);
  return c;
}

}  // namespace jgkd::teachers
