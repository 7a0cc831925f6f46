// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "jgkd/ad/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "jgkd/errors.hpp"

namespace jgkd::ad {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const RowMajor>;
using Map = Eigen::Map<RowMajor>;

MapC as_matrix(const Tensor& t) { return MapC(t.data().data(), t.rows(), t.cols()); }

void require_matrix(const char* op, const Tensor& t) {
  if (t.rank() != 2) throw ShapeError(std::string(op) + ": expected a matrix, got " + shape_str(t.shape()));
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

Tape& tape_of(Var a) {
  if (!a.tape) throw ContractError("operand is not recorded on a tape");
  return *a.tape;
}

}  // namespace

// --- elementwise -----------------------------------------------------------

Var add(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_same_shape("add", av, bv);
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return tape_of(a).record("add", std::move(out), {a, b}, [a, b](Tape& t, Var, std::span<const double> g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_same_shape("sub", av, bv);
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return tape_of(a).record("sub", std::move(out), {a, b}, [a, b](Tape& t, Var, std::span<const double> g) {
    t.accumulate(a, g);
    if (t.requires_grad(b)) {
      auto gb = t.grad_buffer(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_same_shape("mul", av, bv);
  Tensor out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return tape_of(a).record("mul", std::move(out), {a, b}, [a, b](Tape& t, Var, std::span<const double> g) {
    const Tensor& av = t.value(a);
    const Tensor& bv = t.value(b);
    if (t.requires_grad(a)) {
      auto ga = t.grad_buffer(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.requires_grad(b)) {
      auto gb = t.grad_buffer(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var scale(Var a, double s) {
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
  return tape_of(a).record("scale", std::move(out), {a}, [a, s](Tape& t, Var, std::span<const double> g) {
    auto ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += s * g[i];
  });
}

Var add_bias(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_matrix("add_bias", av);
  const std::size_t m = av.rows();
  const std::size_t n = av.cols();
  if (bv.size() != n) {
    throw ShapeError("add_bias: bias " + shape_str(bv.shape()) + " does not broadcast over " + shape_str(av.shape()));
  }
  Tensor out = av;
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) out.at(r, c) += bv[c];
  }
  return tape_of(a).record("add_bias", std::move(out), {a, b}, [a, b, m, n](Tape& t, Var, std::span<const double> g) {
    t.accumulate(a, g);
    if (t.requires_grad(b)) {
      auto gb = t.grad_buffer(b);
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < n; ++c) gb[c] += g[r * n + c];
      }
    }
  });
}

Var relu(Var a) {
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(0.0, out[i]);
  return tape_of(a).record("relu", std::move(out), {a}, [a](Tape& t, Var, std::span<const double> g) {
    const Tensor& av = t.value(a);
    auto ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (av[i] > 0.0) ga[i] += g[i];
    }
  });
}

// Exact (erf) GELU.
Var gelu(Var a) {
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = out[i];
    out[i] = 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  }
  return tape_of(a).record("gelu", std::move(out), {a}, [a](Tape& t, Var, std::span<const double> g) {
    const Tensor& av = t.value(a);
    auto ga = t.grad_buffer(a);
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = av[i];
      const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
      const double pdf = inv_sqrt_2pi * std::exp(-0.5 * x * x);
      ga[i] += g[i] * (cdf + x * pdf);
    }
  });
}

// --- linear algebra --------------------------------------------------------

Var matmul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_matrix("matmul", av);
  require_matrix("matmul", bv);
  if (av.cols() != bv.rows()) {
    throw ShapeError("matmul: inner dimensions disagree " + shape_str(av.shape()) + " x " + shape_str(bv.shape()));
  }
  const std::size_t m = av.rows();
  const std::size_t p = av.cols();
  const std::size_t q = bv.cols();
  Tensor out({m, q});
  Map(out.data().data(), m, q).noalias() = as_matrix(av) * as_matrix(bv);
  return tape_of(a).record("matmul", std::move(out), {a, b}, [a, b, m, p, q](Tape& t, Var, std::span<const double> g) {
    MapC G(g.data(), m, q);
    if (t.requires_grad(a)) {
      Map(t.grad_buffer(a).data(), m, p).noalias() += G * as_matrix(t.value(b)).transpose();
    }
    if (t.requires_grad(b)) {
      Map(t.grad_buffer(b).data(), p, q).noalias() += as_matrix(t.value(a)).transpose() * G;
    }
  });
}

Var transpose(Var a) {
  const Tensor& av = a.value();
  require_matrix("transpose", av);
  const std::size_t m = av.rows();
  const std::size_t n = av.cols();
  Tensor out({n, m});
  Map(out.data().data(), n, m) = as_matrix(av).transpose();
  return tape_of(a).record("transpose", std::move(out), {a}, [a, m, n](Tape& t, Var, std::span<const double> g) {
    Map(t.grad_buffer(a).data(), m, n) += MapC(g.data(), n, m).transpose();
  });
}

// --- reductions ------------------------------------------------------------

Var sum(Var a) {
  const Tensor& av = a.value();
  double s = 0.0;
  for (double v : av.data()) s += v;
  return tape_of(a).record("sum", Tensor::scalar(s), {a}, [a](Tape& t, Var, std::span<const double> g) {
    auto ga = t.grad_buffer(a);
    for (double& x : ga) x += g[0];
  });
}

Var mean(Var a) {
  const Tensor& av = a.value();
  if (av.size() == 0) throw ShapeError("mean of an empty tensor");
  double s = 0.0;
  for (double v : av.data()) s += v;
  const double inv = 1.0 / static_cast<double>(av.size());
  return tape_of(a).record("mean", Tensor::scalar(s * inv), {a}, [a, inv](Tape& t, Var, std::span<const double> g) {
    auto ga = t.grad_buffer(a);
    for (double& x : ga) x += g[0] * inv;
  });
}

Var row_l2_norm(Var a, double eps) {
  const Tensor& av = a.value();
  require_matrix("row_l2_norm", av);
  const std::size_t m = av.rows();
  const std::size_t n = av.cols();
  Tensor out({m, 1});
  for (std::size_t r = 0; r < m; ++r) {
    double s = eps;
    for (double v : av.row(r)) s += v * v;
    out[r] = std::sqrt(s);
  }
  return tape_of(a).record("row_l2_norm", std::move(out), {a}, [a, m, n](Tape& t, Var self, std::span<const double> g) {
    const Tensor& av = t.value(a);
    const Tensor& nv = t.value(self);
    auto ga = t.grad_buffer(a);
    for (std::size_t r = 0; r < m; ++r) {
      const double k = g[r] / nv[r];
      for (std::size_t c = 0; c < n; ++c) ga[r * n + c] += k * av.at(r, c);
    }
  });
}

Var cosine_rows(Var a, Var b, double eps) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_matrix("cosine_rows", av);
  require_same_shape("cosine_rows", av, bv);
  const std::size_t m = av.rows();
  const std::size_t n = av.cols();
  Tensor out({m, 1});
  for (std::size_t r = 0; r < m; ++r) {
    double ab = 0.0, aa = eps, bb = eps;
    for (std::size_t c = 0; c < n; ++c) {
      ab += av.at(r, c) * bv.at(r, c);
      aa += av.at(r, c) * av.at(r, c);
      bb += bv.at(r, c) * bv.at(r, c);
    }
    out[r] = ab / std::sqrt(aa * bb);
  }
  return tape_of(a).record("cosine_rows", std::move(out), {a, b},
                           [a, b, m, n, eps](Tape& t, Var, std::span<const double> g) {
                             const Tensor& av = t.value(a);
                             const Tensor& bv = t.value(b);
                             const bool ra = t.requires_grad(a);
                             const bool rb = t.requires_grad(b);
                             for (std::size_t r = 0; r < m; ++r) {
                               double ab = 0.0, aa = eps, bb = eps;
                               for (std::size_t c = 0; c < n; ++c) {
                                 ab += av.at(r, c) * bv.at(r, c);
                                 aa += av.at(r, c) * av.at(r, c);
                                 bb += bv.at(r, c) * bv.at(r, c);
                               }
                               const double denom = std::sqrt(aa * bb);
                               const double cos = ab / denom;
                               // d cos / d a = b/denom - cos * a/aa
                               if (ra) {
                                 auto ga = t.grad_buffer(a);
                                 for (std::size_t c = 0; c < n; ++c) {
                                   ga[r * n + c] += g[r] * (bv.at(r, c) / denom - cos * av.at(r, c) / aa);
                                 }
                               }
                               if (rb) {
                                 auto gb = t.grad_buffer(b);
                                 for (std::size_t c = 0; c < n; ++c) {
                                   gb[r * n + c] += g[r] * (av.at(r, c) / denom - cos * bv.at(r, c) / bb);
                                 }
                               }
                             }
                           });
}

// --- normalisation / probability --------------------------------------------

namespace {

void softmax_inplace(std::span<double> row, std::span<const std::uint8_t> allowed) {
  double mx = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (!allowed.empty() && !allowed[c]) continue;
    mx = std::max(mx, row[c]);
    any = true;
  }
  if (!any) throw NumericError("softmax_rows: row with every entry masked");
  double s = 0.0;
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (!allowed.empty() && !allowed[c]) {
      row[c] = 0.0;
      continue;
    }
    row[c] = std::exp(row[c] - mx);
    s += row[c];
  }
  for (double& v : row) v /= s;
}

void check_mask(const char* op, const AttentionMask* mask, std::size_t rows, std::size_t cols) {
  if (mask && (mask->rows != rows || mask->cols != cols || mask->allowed.size() != rows * cols)) {
    throw ShapeError(std::string(op) + ": mask shape does not match [" + std::to_string(rows) + "x" +
                     std::to_string(cols) + "]");
  }
}

std::span<const std::uint8_t> mask_row(const AttentionMask* mask, std::size_t r) {
  if (!mask) return {};
  return std::span(mask->allowed).subspan(r * mask->cols, mask->cols);
}

// dX = P * (dP - rowsum(dP * P)), accumulated into dx.
void softmax_backward(std::span<const double> p, std::span<const double> dp, std::span<double> dx, std::size_t m,
                      std::size_t n, double extra_scale = 1.0) {
  for (std::size_t r = 0; r < m; ++r) {
    double dot = 0.0;
    for (std::size_t c = 0; c < n; ++c) dot += dp[r * n + c] * p[r * n + c];
    for (std::size_t c = 0; c < n; ++c) dx[r * n + c] += extra_scale * p[r * n + c] * (dp[r * n + c] - dot);
  }
}

}  // namespace

Var softmax_rows(Var x, const AttentionMask* mask) {
  const Tensor& xv = x.value();
  require_matrix("softmax_rows", xv);
  const std::size_t m = xv.rows();
  const std::size_t n = xv.cols();
  if (n == 0) throw ShapeError("softmax_rows: zero columns");
  check_mask("softmax_rows", mask, m, n);
  Tensor out = xv;
  for (std::size_t r = 0; r < m; ++r) softmax_inplace(out.row(r), mask_row(mask, r));
  return tape_of(x).record("softmax_rows", std::move(out), {x}, [x, m, n](Tape& t, Var self, std::span<const double> g) {
    softmax_backward(t.value(self).data(), g, t.grad_buffer(x), m, n);
  });
}

Var cross_entropy_rows(Var logits, std::span<const std::size_t> targets) {
  const Tensor& lv = logits.value();
  require_matrix("cross_entropy_rows", lv);
  const std::size_t m = lv.rows();
  const std::size_t n = lv.cols();
  if (targets.size() != m) {
    throw ShapeError("cross_entropy_rows: " + std::to_string(targets.size()) + " targets for " + std::to_string(m) +
                     " rows");
  }
  if (m == 0) throw ShapeError("cross_entropy_rows: no rows");
  std::vector<std::size_t> tgt(targets.begin(), targets.end());
  for (std::size_t r = 0; r < m; ++r) {
    if (tgt[r] >= n) {
      throw IndexError("cross_entropy_rows: target " + std::to_string(tgt[r]) + " out of range [0," +
                       std::to_string(n) + ") at row " + std::to_string(r));
    }
  }
  std::vector<double> probs(lv.data().begin(), lv.data().end());
  double total = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    auto row = lv.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double v : row) s += std::exp(v - mx);
    const double log_z = mx + std::log(s);
    total += log_z - row[tgt[r]];
    for (std::size_t c = 0; c < n; ++c) probs[r * n + c] = std::exp(row[c] - log_z);
  }
  const double inv = 1.0 / static_cast<double>(m);
  return tape_of(logits).record(
      "cross_entropy_rows", Tensor::scalar(total * inv), {logits},
      [logits, probs = std::move(probs), tgt = std::move(tgt), m, n, inv](Tape& t, Var, std::span<const double> g) {
        auto gl = t.grad_buffer(logits);
        for (std::size_t r = 0; r < m; ++r) {
          for (std::size_t c = 0; c < n; ++c) {
            const double y = c == tgt[r] ? 1.0 : 0.0;
            gl[r * n + c] += g[0] * inv * (probs[r * n + c] - y);
          }
        }
      });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  const Tensor& xv = x.value();
  require_matrix("layer_norm", xv);
  const std::size_t m = xv.rows();
  const std::size_t n = xv.cols();
  if (gain.value().size() != n || bias.value().size() != n) {
    throw ShapeError("layer_norm: gain/bias size does not match width " + std::to_string(n));
  }
  const Tensor& gv = gain.value();
  const Tensor& bv = bias.value();
  std::vector<double> xhat(m * n);
  std::vector<double> inv_std(m);
  Tensor out({m, n});
  for (std::size_t r = 0; r < m; ++r) {
    auto row = xv.row(r);
    double mu = 0.0;
    for (double v : row) mu += v;
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (double v : row) var += (v - mu) * (v - mu);
    var /= static_cast<double>(n);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < n; ++c) {
      xhat[r * n + c] = (row[c] - mu) * inv_std[r];
      out.at(r, c) = xhat[r * n + c] * gv[c] + bv[c];
    }
  }
  return tape_of(x).record(
      "layer_norm", std::move(out), {x, gain, bias},
      [x, gain, bias, m, n, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape& t, Var,
                                                                                 std::span<const double> g) {
        const Tensor& gv = t.value(gain);
        if (t.requires_grad(gain)) {
          auto gg = t.grad_buffer(gain);
          for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < n; ++c) gg[c] += g[r * n + c] * xhat[r * n + c];
        }
        if (t.requires_grad(bias)) {
          auto gb = t.grad_buffer(bias);
          for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < n; ++c) gb[c] += g[r * n + c];
        }
        if (t.requires_grad(x)) {
          auto gx = t.grad_buffer(x);
          const double inv_n = 1.0 / static_cast<double>(n);
          for (std::size_t r = 0; r < m; ++r) {
            double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
            for (std::size_t c = 0; c < n; ++c) {
              const double dxhat = g[r * n + c] * gv[c];
              mean_dxhat += dxhat;
              mean_dxhat_xhat += dxhat * xhat[r * n + c];
            }
            mean_dxhat *= inv_n;
            mean_dxhat_xhat *= inv_n;
            for (std::size_t c = 0; c < n; ++c) {
              const double dxhat = g[r * n + c] * gv[c];
              gx[r * n + c] += inv_std[r] * (dxhat - mean_dxhat - xhat[r * n + c] * mean_dxhat_xhat);
            }
          }
        }
      });
}

namespace {

// Scores for one head scaled by 1/sqrt(dh), softmaxed with the mask.
RowMajor head_probs(const Tensor& q, const Tensor& k, std::size_t dh, std::size_t head, const AttentionMask* mask) {
  const std::size_t lq = q.rows();
  const std::size_t lk = k.rows();
  const std::size_t d = q.cols();
  MapC Q(q.data().data(), lq, d);
  MapC K(k.data().data(), lk, d);
  RowMajor s = Q.middleCols(head * dh, dh) * K.middleCols(head * dh, dh).transpose();
  s *= 1.0 / std::sqrt(static_cast<double>(dh));
  for (std::size_t r = 0; r < lq; ++r) {
    softmax_inplace(std::span<double>(s.data() + r * lk, lk), mask_row(mask, r));
  }
  return s;
}

}  // namespace

Tensor attention_probs(const Tensor& q, const Tensor& k, std::size_t heads, std::size_t head,
                       const AttentionMask* mask) {
  const std::size_t d = q.cols();
  if (heads == 0 || d % heads != 0 || head >= heads) throw ShapeError("attention_probs: bad head configuration");
  check_mask("attention_probs", mask, q.rows(), k.rows());
  RowMajor p = head_probs(q, k, d / heads, head, mask);
  return Tensor({q.rows(), k.rows()}, std::vector<double>(p.data(), p.data() + p.size()));
}

Var attention(Var q, Var k, Var v, std::size_t heads, const AttentionMask* mask) {
  const Tensor& qv = q.value();
  const Tensor& kv = k.value();
  const Tensor& vv = v.value();
  require_matrix("attention", qv);
  require_matrix("attention", kv);
  require_matrix("attention", vv);
  const std::size_t lq = qv.rows();
  const std::size_t lk = kv.rows();
  const std::size_t d = qv.cols();
  if (kv.cols() != d || vv.cols() != d || vv.rows() != lk) {
    throw ShapeError("attention: incompatible q " + shape_str(qv.shape()) + ", k " + shape_str(kv.shape()) + ", v " +
                     shape_str(vv.shape()));
  }
  if (heads == 0 || d % heads != 0) {
    throw ShapeError("attention: width " + std::to_string(d) + " not divisible by " + std::to_string(heads) + " heads");
  }
  if (lk == 0) throw ShapeError("attention: empty key sequence");
  check_mask("attention", mask, lq, lk);
  const std::size_t dh = d / heads;

  std::vector<RowMajor> probs;
  probs.reserve(heads);
  Tensor out({lq, d});
  Map O(out.data().data(), lq, d);
  MapC V(vv.data().data(), lk, d);
  for (std::size_t h = 0; h < heads; ++h) {
    probs.push_back(head_probs(qv, kv, dh, h, mask));
    O.middleCols(h * dh, dh).noalias() = probs.back() * V.middleCols(h * dh, dh);
  }
  return tape_of(q).record(
      "attention", std::move(out), {q, k, v},
      [q, k, v, heads, lq, lk, d, dh, probs = std::move(probs)](Tape& t, Var, std::span<const double> g) {
        MapC G(g.data(), lq, d);
        MapC Q(t.value(q).data().data(), lq, d);
        MapC K(t.value(k).data().data(), lk, d);
        MapC V(t.value(v).data().data(), lk, d);
        const double sc = 1.0 / std::sqrt(static_cast<double>(dh));
        const bool rq = t.requires_grad(q), rk = t.requires_grad(k), rv = t.requires_grad(v);
        for (std::size_t h = 0; h < heads; ++h) {
          const RowMajor& P = probs[h];
          auto Gh = G.middleCols(h * dh, dh);
          if (rv) Map(t.grad_buffer(v).data(), lk, d).middleCols(h * dh, dh).noalias() += P.transpose() * Gh;
          if (!rq && !rk) continue;
          RowMajor dP = Gh * V.middleCols(h * dh, dh).transpose();
          RowMajor dS = RowMajor::Zero(lq, lk);
          softmax_backward(std::span<const double>(P.data(), P.size()), std::span<const double>(dP.data(), dP.size()),
                           std::span<double>(dS.data(), dS.size()), lq, lk, sc);
          if (rq) Map(t.grad_buffer(q).data(), lq, d).middleCols(h * dh, dh).noalias() += dS * K.middleCols(h * dh, dh);
          if (rk) {
            Map(t.grad_buffer(k).data(), lk, d).middleCols(h * dh, dh).noalias() +=
                dS.transpose() * Q.middleCols(h * dh, dh);
          }
        }
      });
}

// --- structural ------------------------------------------------------------

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no operands");
  const std::size_t m = parts[0].rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Var& p : parts) {
    if (p.rows() != m) {
      throw ShapeError("concat_cols: row counts disagree " + shape_str(parts[0].shape()) + " vs " +
                       shape_str(p.shape()));
    }
    widths.push_back(p.cols());
    total += p.cols();
  }
  Tensor out({m, total});
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Tensor& pv = p.value();
    for (std::size_t r = 0; r < m; ++r) std::copy(pv.row(r).begin(), pv.row(r).end(), out.row(r).begin() + off);
    off += pv.cols();
  }
  std::vector<Var> ins(parts.begin(), parts.end());
  return tape_of(parts[0]).record("concat_cols", std::move(out), parts,
                                  [ins, widths, m, total](Tape& t, Var, std::span<const double> g) {
                                    std::size_t off = 0;
                                    for (std::size_t i = 0; i < ins.size(); ++i) {
                                      if (t.requires_grad(ins[i])) {
                                        auto gi = t.grad_buffer(ins[i]);
                                        for (std::size_t r = 0; r < m; ++r)
                                          for (std::size_t c = 0; c < widths[i]; ++c)
                                            gi[r * widths[i] + c] += g[r * total + off + c];
                                      }
                                      off += widths[i];
                                    }
                                  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no operands");
  const std::size_t n = parts[0].cols();
  std::size_t total = 0;
  std::vector<std::size_t> sizes;
  for (const Var& p : parts) {
    if (p.cols() != n) {
      throw ShapeError("concat_rows: column counts disagree " + shape_str(parts[0].shape()) + " vs " +
                       shape_str(p.shape()));
    }
    sizes.push_back(p.value().size());
    total += p.rows();
  }
  std::vector<double> data;
  data.reserve(total * n);
  for (const Var& p : parts) data.insert(data.end(), p.value().data().begin(), p.value().data().end());
  std::vector<Var> ins(parts.begin(), parts.end());
  return tape_of(parts[0]).record("concat_rows", Tensor({total, n}, std::move(data)), parts,
                                  [ins, sizes](Tape& t, Var, std::span<const double> g) {
                                    std::size_t off = 0;
                                    for (std::size_t i = 0; i < ins.size(); ++i) {
                                      t.accumulate(ins[i], g.subspan(off, sizes[i]));
                                      off += sizes[i];
                                    }
                                  });
}

Var slice_rows(Var a, std::size_t begin, std::size_t count) {
  const Tensor& av = a.value();
  require_matrix("slice_rows", av);
  if (begin + count > av.rows()) {
    throw ShapeError("slice_rows: rows [" + std::to_string(begin) + "," + std::to_string(begin + count) +
                     ") out of " + shape_str(av.shape()));
  }
  const std::size_t n = av.cols();
  std::vector<double> data(av.data().begin() + begin * n, av.data().begin() + (begin + count) * n);
  return tape_of(a).record("slice_rows", Tensor({count, n}, std::move(data)), {a},
                           [a, begin, n](Tape& t, Var, std::span<const double> g) {
                             auto ga = t.grad_buffer(a);
                             for (std::size_t i = 0; i < g.size(); ++i) ga[begin * n + i] += g[i];
                           });
}

Var gather_rows(Var table, std::span<const std::size_t> indices) {
  const Tensor& tv = table.value();
  require_matrix("gather_rows", tv);
  const std::size_t n = tv.cols();
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  Tensor out({idx.size(), n});
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= tv.rows()) {
      throw IndexError("gather_rows: index " + std::to_string(idx[r]) + " out of range for " +
                       shape_str(tv.shape()));
    }
    std::copy(tv.row(idx[r]).begin(), tv.row(idx[r]).end(), out.row(r).begin());
  }
  return tape_of(table).record("gather_rows", std::move(out), {table},
                               [table, idx = std::move(idx), n](Tape& t, Var, std::span<const double> g) {
                                 auto gt = t.grad_buffer(table);
                                 for (std::size_t r = 0; r < idx.size(); ++r)
                                   for (std::size_t c = 0; c < n; ++c) gt[idx[r] * n + c] += g[r * n + c];
                               });
}

std::span<const std::string_view> primitive_registry() {
  static constexpr std::array<std::string_view, 21> kNames = {
      "add",         "sub",          "mul",         "scale",       "add_bias",           "relu",
      "gelu",        "matmul",       "transpose",   "sum",         "mean",               "row_l2_norm",
      "cosine_rows", "softmax_rows", "layer_norm",  "attention",   "cross_entropy_rows", "concat_cols",
      "concat_rows", "slice_rows",   "gather_rows",
  };
  return kNames;
}

}  // namespace jgkd::ad
