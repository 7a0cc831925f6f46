// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "jgkd/nn/layers.hpp"

#include <cmath>

#include "jgkd/errors.hpp"

namespace jgkd::nn {

Var Binder::operator()(std::size_t index) {
  if (trainable_) return tape_.param((*mutable_)[index]);
  if (auto it = constants_.find(index); it != constants_.end()) return it->second;
  Var v = tape_.constant(params_[index].value);
  constants_.emplace(index, v);
  return v;
}

Linear Linear::create(ParamSet& ps, const std::string& name, std::size_t in, std::size_t out, Rng& rng,
                      bool bias) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  Linear l;
  l.in = in;
  l.out = out;
  l.has_bias = bias;
  l.weight = ps.add(name + ".weight", uniform_tensor(rng, {in, out}, -bound, bound));
  if (bias) l.bias = ps.add(name + ".bias", uniform_tensor(rng, {1, out}, -bound, bound));
  return l;
}

Var Linear::operator()(Binder& b, Var x) const {
  Var y = ad::matmul(x, b(weight));
  return has_bias ? ad::add_bias(y, b(bias)) : y;
}

LayerNorm LayerNorm::create(ParamSet& ps, const std::string& name, std::size_t dim) {
  LayerNorm ln;
  ln.gain = ps.add(name + ".gain", Tensor({1, dim}, 1.0));
  ln.bias = ps.add(name + ".bias", Tensor({1, dim}, 0.0));
  return ln;
}

Var LayerNorm::operator()(Binder& b, Var x) const { return ad::layer_norm(x, b(gain), b(bias)); }

MultiHeadAttention MultiHeadAttention::create(ParamSet& ps, const std::string& name, std::size_t dim,
                                              std::size_t heads, Rng& rng) {
  if (heads == 0 || dim % heads != 0) {
    throw ConfigError(name + ": dim " + std::to_string(dim) + " is not divisible by " + std::to_string(heads) +
                      " heads");
  }
  MultiHeadAttention m;
  m.heads = heads;
  m.q = Linear::create(ps, name + ".q", dim, dim, rng);
  m.k = Linear::create(ps, name + ".k", dim, dim, rng, false);
  m.v = Linear::create(ps, name + ".v", dim, dim, rng);
  m.o = Linear::create(ps, name + ".o", dim, dim, rng);
  return m;
}

Var MultiHeadAttention::operator()(Binder& b, Var query, Var memory, const AttentionMask* mask) const {
  Var a = ad::attention(q(b, query), k(b, memory), v(b, memory), heads, mask);
  return o(b, a);
}

FeedForward FeedForward::create(ParamSet& ps, const std::string& name, std::size_t dim, std::size_t hidden,
                                Rng& rng) {
  return FeedForward{Linear::create(ps, name + ".up", dim, hidden, rng),
                     Linear::create(ps, name + ".down", hidden, dim, rng)};
}

Var FeedForward::operator()(Binder& b, Var x) const { return down(b, ad::gelu(up(b, x))); }

EncoderLayer EncoderLayer::create(ParamSet& ps, const std::string& name, std::size_t dim, std::size_t heads,
                                  std::size_t ff_dim, Rng& rng) {
  EncoderLayer l;
  l.self_attn = MultiHeadAttention::create(ps, name + ".self", dim, heads, rng);
  l.ln1 = LayerNorm::create(ps, name + ".ln1", dim);
  l.ff = FeedForward::create(ps, name + ".ff", dim, ff_dim, rng);
  l.ln2 = LayerNorm::create(ps, name + ".ln2", dim);
  return l;
}

Var EncoderLayer::operator()(Binder& b, Var x, const AttentionMask* mask) const {
  Var h = ln1(b, ad::add(x, self_attn(b, x, x, mask)));
  return ln2(b, ad::add(h, ff(b, h)));
}

DecoderLayer DecoderLayer::create(ParamSet& ps, const std::string& name, std::size_t dim, std::size_t heads,
                                  std::size_t ff_dim, bool cross, Rng& rng) {
  DecoderLayer l;
  l.self_attn = MultiHeadAttention::create(ps, name + ".self", dim, heads, rng);
  l.ln1 = LayerNorm::create(ps, name + ".ln1", dim);
  l.has_cross = cross;
  if (cross) {
    l.cross_attn = MultiHeadAttention::create(ps, name + ".cross", dim, heads, rng);
    l.ln2 = LayerNorm::create(ps, name + ".ln2", dim);
  }
  l.ff = FeedForward::create(ps, name + ".ff", dim, ff_dim, rng);
  l.ln3 = LayerNorm::create(ps, name + ".ln3", dim);
  return l;
}

Var DecoderLayer::operator()(Binder& b, Var x, Var memory) const {
  Var h = ln1(b, ad::add(x, self_attn(b, x, x)));
  if (has_cross) h = ln2(b, ad::add(h, cross_attn(b, h, memory)));
  return ln3(b, ad::add(h, ff(b, h)));
}

Tensor sinusoidal_positions(std::size_t rows, std::size_t dim) {
  Tensor t({rows, dim});
  for (std::size_t p = 0; p < rows; ++p) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(i - i % 2) / static_cast<double>(dim));
      const double angle = static_cast<double>(p) * rate;
      t.at(p, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return t;
}

}  // namespace jgkd::nn
