// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "jgkd/ad/primitive_cases.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "jgkd/ad/ops.hpp"
#include "jgkd/random.hpp"

namespace jgkd::ad {

namespace {

constexpr std::size_t kMaxDim = 8;

// Reduces an arbitrary output to a scalar with fixed random weights so every
// output element carries a distinct cotangent.
Var weighted_sum(Var out, const Tensor& weights) {
  Tape& t = *out.tape;
  return sum(mul(out, t.constant(weights)));
}

Tensor weights_like(Rng& rng, const Shape& shape) { return uniform_tensor(rng, shape, -1.0, 1.0); }

// Values bounded away from zero, for kinked primitives.
Tensor away_from_zero(Rng& rng, Shape shape) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) {
    const double mag = uniform(rng, 0.1, 1.0);
    v = bernoulli(rng, 0.5) ? mag : -mag;
  }
  return t;
}

class CaseBuilder {
 public:
  explicit CaseBuilder(std::uint64_t seed) : rng_(seed) {}

  std::size_t dim() { return uniform_index(rng_, 1, kMaxDim); }
  Rng& rng() { return rng_; }

  Tensor rand(Shape s, double lo = -1.0, double hi = 1.0) { return uniform_tensor(rng_, std::move(s), lo, hi); }

  template <typename Fn>
  void add(std::string name, std::string primitive, std::vector<Tensor> inputs, Shape out_shape, Fn fn) {
    GradCase c;
    c.name = std::move(name);
    c.primitive = std::move(primitive);
    for (std::size_t i = 0; i < inputs.size(); ++i) c.params.add("x" + std::to_string(i), std::move(inputs[i]));
    Tensor w = weights_like(rng_, out_shape);
    const std::size_t n = c.params.size();
    c.build = [fn, w, n](Tape& t, ParamSet& ps) {
      std::vector<Var> xs;
      for (std::size_t i = 0; i < n; ++i) xs.push_back(t.param(ps[i]));
      return weighted_sum(fn(xs), w);
    };
    cases_.push_back(std::move(c));
  }

  std::vector<GradCase> take() { return std::move(cases_); }

 private:
  Rng rng_;
  std::vector<GradCase> cases_;
};

}  // namespace

std::vector<GradCase> primitive_grad_cases(std::uint64_t seed) {
  CaseBuilder b(seed);
  using Xs = const std::vector<Var>&;

  {
    auto m = b.dim(), n = b.dim();
    b.add("add", "add", {b.rand({m, n}), b.rand({m, n})}, {m, n}, [](Xs x) { return add(x[0], x[1]); });
    b.add("sub", "sub", {b.rand({m, n}), b.rand({m, n})}, {m, n}, [](Xs x) { return sub(x[0], x[1]); });
    b.add("mul", "mul", {b.rand({m, n}), b.rand({m, n})}, {m, n}, [](Xs x) { return mul(x[0], x[1]); });
    b.add("scale", "scale", {b.rand({m, n})}, {m, n}, [](Xs x) { return scale(x[0], -1.7); });
    b.add("add_bias", "add_bias", {b.rand({m, n}), b.rand({1, n})}, {m, n}, [](Xs x) { return add_bias(x[0], x[1]); });
    b.add("relu", "relu", {away_from_zero(b.rng(), {m, n})}, {m, n}, [](Xs x) { return relu(x[0]); });
    b.add("gelu", "gelu", {b.rand({m, n}, -3.0, 3.0)}, {m, n}, [](Xs x) { return gelu(x[0]); });
    b.add("transpose", "transpose", {b.rand({m, n})}, {n, m}, [](Xs x) { return transpose(x[0]); });
    b.add("sum", "sum", {b.rand({m, n})}, {1, 1}, [](Xs x) { return sum(x[0]); });
    b.add("mean", "mean", {b.rand({m, n})}, {1, 1}, [](Xs x) { return mean(x[0]); });
    b.add("row_l2_norm", "row_l2_norm", {b.rand({m, n})}, {m, 1}, [](Xs x) { return row_l2_norm(x[0]); });
    // one-column rows have constant cosine, so the gradient is pure round-off
    const std::size_t w = std::max<std::size_t>(n, 2);
    b.add("cosine_rows", "cosine_rows", {b.rand({m, w}), b.rand({m, w})}, {m, 1},
          [](Xs x) { return cosine_rows(x[0], x[1]); });
  }
  {
    auto m = b.dim(), p = b.dim(), q = b.dim();
    b.add("matmul", "matmul", {b.rand({m, p}), b.rand({p, q})}, {m, q}, [](Xs x) { return matmul(x[0], x[1]); });
  }
  {
    auto m = b.dim(), n = b.dim();
    b.add("softmax_rows", "softmax_rows", {b.rand({m, n}, -3.0, 3.0)}, {m, n}, [](Xs x) { return softmax_rows(x[0]); });

    auto mask = std::make_shared<AttentionMask>();
    mask->rows = m;
    mask->cols = n;
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < n; ++c) mask->allowed.push_back(c == r % n || bernoulli(b.rng(), 0.6));
    b.add("softmax_rows_masked", "softmax_rows", {b.rand({m, n}, -3.0, 3.0)}, {m, n},
          [mask](Xs x) { return softmax_rows(x[0], mask.get()); });
  }
  {
    auto m = b.dim(), n = b.dim();
    std::vector<std::size_t> targets;
    for (std::size_t r = 0; r < m; ++r) targets.push_back(uniform_index(b.rng(), 0, n - 1));
    b.add("cross_entropy_rows", "cross_entropy_rows", {b.rand({m, n}, -2.0, 2.0)}, {1, 1},
          [targets](Xs x) { return cross_entropy_rows(x[0], targets); });
  }
  {
    auto m = b.dim(), n = 1 + b.dim();
    b.add("layer_norm", "layer_norm", {b.rand({m, n}, -2.0, 2.0), b.rand({1, n}, 0.5, 1.5), b.rand({1, n})}, {m, n},
          [](Xs x) { return layer_norm(x[0], x[1], x[2]); });
  }
  {
    const std::size_t heads = uniform_index(b.rng(), 1, 2);
    const std::size_t d = heads * uniform_index(b.rng(), 1, 4);
    auto lq = b.dim(), lk = b.dim();
    b.add("attention", "attention", {b.rand({lq, d}), b.rand({lk, d}), b.rand({lk, d})}, {lq, d},
          [heads](Xs x) { return attention(x[0], x[1], x[2], heads); });

    auto mask = std::make_shared<AttentionMask>();
    mask->rows = lq;
    mask->cols = lk;
    for (std::size_t r = 0; r < lq; ++r)
      for (std::size_t c = 0; c < lk; ++c) mask->allowed.push_back(c == r % lk || bernoulli(b.rng(), 0.5));
    b.add("attention_masked", "attention", {b.rand({lq, d}), b.rand({lk, d}), b.rand({lk, d})}, {lq, d},
          [heads, mask](Xs x) { return attention(x[0], x[1], x[2], heads, mask.get()); });
  }
  {
    auto m = b.dim(), n1 = b.dim(), n2 = b.dim();
    b.add("concat_cols", "concat_cols", {b.rand({m, n1}), b.rand({m, n2})}, {m, n1 + n2},
          [](Xs x) { return concat_cols(std::vector<Var>{x[0], x[1]}); });
    auto m2 = b.dim();
    b.add("concat_rows", "concat_rows", {b.rand({m, n1}), b.rand({m2, n1})}, {m + m2, n1},
          [](Xs x) { return concat_rows(std::vector<Var>{x[0], x[1]}); });
  }
  {
    auto m = 1 + b.dim(), n = b.dim();
    const std::size_t begin = uniform_index(b.rng(), 0, m - 1);
    const std::size_t count = uniform_index(b.rng(), 1, m - begin);
    b.add("slice_rows", "slice_rows", {b.rand({m, n})}, {count, n},
          [begin, count](Xs x) { return slice_rows(x[0], begin, count); });
  }
  {
    auto rows = b.dim(), n = b.dim(), picks = b.dim();
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < picks; ++i) idx.push_back(uniform_index(b.rng(), 0, rows - 1));
    b.add("gather_rows", "gather_rows", {b.rand({rows, n})}, {picks, n},
          [idx](Xs x) { return gather_rows(x[0], idx); });
  }
  return b.take();
}

}  // namespace jgkd::ad
