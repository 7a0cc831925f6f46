// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <unordered_map>

#include "jgkd/ad/ops.hpp"
#include "jgkd/random.hpp"

namespace jgkd::nn {

using ad::AttentionMask;
using ad::ParamSet;
using ad::Tape;
using ad::Tensor;
using ad::Var;

// Puts parameters of one ParamSet on a tape. Trainable binders create
// gradient-carrying leaves; frozen binders create constants, so nothing
// upstream of them can receive a gradient.
class Binder {
 public:
  Binder(Tape& tape, ParamSet& params) : tape_(tape), mutable_(&params), params_(params), trainable_(true) {}
  Binder(Tape& tape, const ParamSet& params) : tape_(tape), params_(params), trainable_(false) {}

  Var operator()(std::size_t index);
  Tape& tape() { return tape_; }
  bool trainable() const { return trainable_; }

 private:
  Tape& tape_;
  ParamSet* mutable_ = nullptr;
  const ParamSet& params_;
  bool trainable_;
  std::unordered_map<std::size_t, Var> constants_;
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights [in x out], same for bias.
struct Linear {
  std::size_t weight = 0;
  std::size_t bias = 0;
  bool has_bias = true;
  std::size_t in = 0;
  std::size_t out = 0;

  static Linear create(ParamSet& ps, const std::string& name, std::size_t in, std::size_t out, Rng& rng,
                       bool bias = true);
  Var operator()(Binder& b, Var x) const;
};

struct LayerNorm {
  std::size_t gain = 0;
  std::size_t bias = 0;

  static LayerNorm create(ParamSet& ps, const std::string& name, std::size_t dim);
  Var operator()(Binder& b, Var x) const;
};

// Keys carry no bias: a per-key constant is invisible to the softmax.
struct MultiHeadAttention {
  Linear q, k, v, o;
  std::size_t heads = 1;

  static MultiHeadAttention create(ParamSet& ps, const std::string& name, std::size_t dim, std::size_t heads,
                                   Rng& rng);
  Var operator()(Binder& b, Var query, Var memory, const AttentionMask* mask = nullptr) const;
};

struct FeedForward {
  Linear up, down;

  static FeedForward create(ParamSet& ps, const std::string& name, std::size_t dim, std::size_t hidden, Rng& rng);
  Var operator()(Binder& b, Var x) const;
};

// Post-LN transformer encoder layer.
struct EncoderLayer {
  MultiHeadAttention self_attn;
  LayerNorm ln1;
  FeedForward ff;
  LayerNorm ln2;

  static EncoderLayer create(ParamSet& ps, const std::string& name, std::size_t dim, std::size_t heads,
                             std::size_t ff_dim, Rng& rng);
  Var operator()(Binder& b, Var x, const AttentionMask* mask = nullptr) const;
};

// Post-LN decoder layer: self-attention, cross-attention over a memory
// sequence, feed-forward. No causal mask. A layer built without
// cross-attention is a plain encoder layer.
struct DecoderLayer {
  MultiHeadAttention self_attn;
  LayerNorm ln1;
  bool has_cross = true;
  MultiHeadAttention cross_attn;
  LayerNorm ln2;
  FeedForward ff;
  LayerNorm ln3;

  static DecoderLayer create(ParamSet& ps, const std::string& name, std::size_t dim, std::size_t heads,
                             std::size_t ff_dim, bool cross, Rng& rng);
  Var operator()(Binder& b, Var x, Var memory) const;
};

// Fixed sinusoidal position table [rows x dim].
Tensor sinusoidal_positions(std::size_t rows, std::size_t dim);

}  // namespace jgkd::nn
