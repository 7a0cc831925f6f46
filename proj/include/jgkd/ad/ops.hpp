// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "jgkd/ad/tape.hpp"

namespace jgkd::ad {

// Row-major [rows x cols] attention mask: nonzero = query may attend to key.
struct AttentionMask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> allowed;

  bool operator()(std::size_t r, std::size_t c) const { return allowed[r * cols + c] != 0; }
};

// --- elementwise -----------------------------------------------------------
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
// a [m x n] + b broadcast over rows, b is [1 x n].
Var add_bias(Var a, Var b);
Var relu(Var a);
Var gelu(Var a);

// --- linear algebra --------------------------------------------------------
Var matmul(Var a, Var b);
Var transpose(Var a);

// --- reductions ------------------------------------------------------------
Var sum(Var a);
Var mean(Var a);
// Per-row Euclidean norm sqrt(sum x^2 + eps) as [m x 1].
Var row_l2_norm(Var a, double eps = 1e-12);
// Per-row cosine similarity a.b / sqrt((|a|^2 + eps)(|b|^2 + eps)) as [m x 1].
Var cosine_rows(Var a, Var b, double eps = 1e-12);

// --- normalisation / probability --------------------------------------------
Var softmax_rows(Var x, const AttentionMask* mask = nullptr);
// Mean over rows of -log softmax(logits)[row, target].
Var cross_entropy_rows(Var logits, std::span<const std::size_t> targets);
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);

// Multi-head scaled dot-product attention. q [Lq x d], k/v [Lk x d]; heads
// split d into equal contiguous slices.
Var attention(Var q, Var k, Var v, std::size_t heads, const AttentionMask* mask = nullptr);
// Forward-only attention probabilities for one head, [Lq x Lk].
Tensor attention_probs(const Tensor& q, const Tensor& k, std::size_t heads, std::size_t head,
                       const AttentionMask* mask = nullptr);

// --- structural ------------------------------------------------------------
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_rows(Var a, std::size_t begin, std::size_t count);
// Rows of `table` picked by index; repeated indices accumulate gradient.
Var gather_rows(Var table, std::span<const std::size_t> indices);

// Closed list of differentiable primitives; each one has a grad_check case.
std::span<const std::string_view> primitive_registry();

}  // namespace jgkd::ad
