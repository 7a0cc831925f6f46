// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <set>
#include <string>

#include "jgkd/ad/adam.hpp"
#include "jgkd/ad/grad_check.hpp"
#include "jgkd/ad/ops.hpp"
#include "jgkd/ad/primitive_cases.hpp"
#include "jgkd/errors.hpp"
#include "jgkd/random.hpp"

using namespace jgkd;
using namespace jgkd::ad;

namespace {

// Independent central-difference oracle over a plain function of a flat vector.
template <typename Fn>
std::vector<double> central_diff(Fn f, std::vector<double> x, double h = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = x[i];
    x[i] = s + h;
    const double fp = f(x);
    x[i] = s - h;
    const double fm = f(x);
    x[i] = s;
    g[i] = (fp - fm) / (2 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("matmul examples") {
  Tape t;
  auto id = t.constant(Tensor::matrix({{1, 0}, {0, 1}}));
  auto a = t.constant(Tensor::matrix({{1, 2}, {3, 4}}));
  CHECK(matmul(id, a).value() == a.value());

  auto col = t.constant(Tensor::matrix({{0}, {1}}));
  CHECK(matmul(a, col).value() == Tensor::matrix({{2}, {4}}));

  auto z = t.constant(Tensor({2, 3}, 0.0));
  CHECK(matmul(a, z).value() == Tensor({2, 3}, 0.0));
}

TEST_CASE("matmul dimension error names both shapes") {
  Tape t;
  auto a = t.constant(Tensor({2, 3}));
  auto b = t.constant(Tensor({2, 3}));
  try {
    matmul(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x3] x [2x3]") != std::string::npos);
  }
}

TEST_CASE("softmax_rows examples") {
  Tape t;
  auto s = softmax_rows(t.constant(Tensor::matrix({{0, 0}})));
  CHECK(s.value()[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.value()[1] == doctest::Approx(0.5).epsilon(1e-15));

  auto shifted = softmax_rows(t.constant(Tensor::matrix({{7.5, 7.5 + 1.3}})));
  auto base = softmax_rows(t.constant(Tensor::matrix({{0, 1.3}})));
  CHECK(std::abs(shifted.value()[1] - base.value()[1]) < 1e-15);

  auto l3 = softmax_rows(t.constant(Tensor::matrix({{0, std::log(3.0)}})));
  CHECK(std::abs(l3.value()[0] - 0.25) < 1e-15);
  CHECK(std::abs(l3.value()[1] - 0.75) < 1e-15);
}

TEST_CASE("softmax rows sum to one for bounded inputs") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = uniform_index(rng, 1, 8), n = uniform_index(rng, 1, 8);
    Tape t;
    auto p = softmax_rows(t.constant(uniform_tensor(rng, {m, n}, -50.0, 50.0)));
    for (std::size_t r = 0; r < m; ++r) {
      double s = 0.0;
      for (double v : p.value().row(r)) {
        CHECK(v >= 0.0);
        s += v;
      }
      CHECK(std::abs(s - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("cross_entropy_rows examples") {
  Tape t;
  const std::vector<std::size_t> zero{0}, one{1};
  CHECK(std::abs(cross_entropy_rows(t.constant(Tensor::matrix({{0, 0}})), zero).item() - std::log(2.0)) < 1e-15);
  CHECK(cross_entropy_rows(t.constant(Tensor::matrix({{30, -30}})), zero).item() < 1e-9);
  CHECK(std::abs(cross_entropy_rows(t.constant(Tensor::matrix({{0, std::log(3.0)}})), one).item() -
                 (-std::log(0.75))) < 1e-15);
  CHECK(std::abs(-std::log(0.75) - 0.287682) < 1e-6);

  const std::vector<std::size_t> bad{2};
  CHECK_THROWS_AS(cross_entropy_rows(t.constant(Tensor::matrix({{0, 0}})), bad), IndexError);
}

TEST_CASE("backward examples") {
  {
    Tape t;
    auto x = t.input(Tensor::scalar(2.0));
    auto y = t.input(Tensor::scalar(3.0));
    auto f = mul(x, y);
    t.backward(f);
    CHECK(t.grad(x)[0] == 3.0);
    CHECK(t.grad(y)[0] == 2.0);
  }
  {
    Tape t;
    auto x = t.input(Tensor::matrix({{1, -2}}));
    t.backward(sum(mul(x, x)));
    CHECK(t.grad(x) == std::vector<double>{2.0, -4.0});
  }
  {
    Tape t;
    auto x = t.input(Tensor::matrix({{1, 2}}));
    CHECK_THROWS_AS(t.backward(x), ContractError);
  }
}

TEST_CASE("cross entropy chain matches finite differences") {
  Rng rng(5);
  Tensor logits = uniform_tensor(rng, {3, 4}, -2.0, 2.0);
  Tensor w = uniform_tensor(rng, {4, 4}, -1.0, 1.0);
  const std::vector<std::size_t> targets{1, 3, 0};

  auto value = [&](const std::vector<double>& x) {
    Tape t;
    auto l = t.constant(Tensor({3, 4}, x));
    return cross_entropy_rows(matmul(l, t.constant(w)), targets).item();
  };
  Tape t;
  auto l = t.input(logits);
  t.backward(cross_entropy_rows(matmul(l, t.constant(w)), targets));
  const auto analytic = t.grad(l);
  const auto numeric = central_diff(value, logits.values());
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    CHECK(std::abs(analytic[i] - numeric[i]) <= 1e-5 * std::max(std::abs(numeric[i]), 1e-3));
  }
}

TEST_CASE("grad_check examples") {
  ParamSet ps;
  Rng rng(3);
  ps.add("x", uniform_tensor(rng, {2, 3}, -1.0, 1.0));
  ps.add("y", uniform_tensor(rng, {2, 3}, -1.0, 1.0));

  SUBCASE("sum of squares passes tightly") {
    auto rep = grad_check([&](Tape& t) { auto x = t.param(ps[0]); return sum(mul(x, x)); }, ps, 1e-5, 1e-3);
    CHECK(rep.passed);
    CHECK(rep.max_rel_error < 1e-9);
  }
  SUBCASE("doubled backward rule is caught and located") {
    set_backward_defect("mul", 2.0);
    auto rep = grad_check(
        [&](Tape& t) {
          auto x = t.param(ps[0]);
          auto y = t.param(ps[1]);
          return add(sum(mul(x, x)), sum(scale(y, 3.0)));
        },
        ps, 1e-5, 1e-3);
    set_backward_defect("", 1.0);
    CHECK_FALSE(rep.passed);
    CHECK(rep.worst_param == "x");
    CHECK(rep.max_rel_error == doctest::Approx(0.5).epsilon(1e-4));
  }
  SUBCASE("non-deterministic objective is rejected") {
    int calls = 0;
    CHECK_THROWS_AS(grad_check(
                        [&](Tape& t) {
                          ++calls;
                          auto x = t.param(ps[0]);
                          return scale(sum(x), 1.0 + 1e-3 * calls);
                        },
                        ps),
                    DeterminismError);
  }
  SUBCASE("bad step") {
    CHECK_THROWS_AS(grad_check([&](Tape& t) { return sum(t.param(ps[0])); }, ps, 0.0, 1e-3), ValidationError);
  }
}

TEST_CASE("every registered primitive passes grad_check on random shapes") {
  std::set<std::string> covered;
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    for (auto& c : primitive_grad_cases(seed)) {
      auto rep = grad_check([&](Tape& t) { return c.build(t, c.params); }, c.params, 1e-5, 1e-3);
      INFO(c.name << " seed " << seed << " worst " << rep.worst_param << "[" << rep.worst_index
                  << "] rel " << rep.max_rel_error);
      CHECK(rep.passed);
      covered.insert(c.primitive);
    }
  }
  for (auto name : primitive_registry()) {
    INFO(name);
    CHECK(covered.count(std::string(name)) == 1);
  }
}

TEST_CASE("backward is additive over independent losses") {
  Rng rng(17);
  ParamSet ps;
  ps.add("w", uniform_tensor(rng, {3, 3}, -1.0, 1.0));
  Tensor xin = uniform_tensor(rng, {2, 3}, -1.0, 1.0);
  const std::vector<std::size_t> tgt{0, 2};

  auto loss_a = [&](Tape& t) { return cross_entropy_rows(matmul(t.constant(xin), t.param(ps[0])), tgt); };
  auto loss_b = [&](Tape& t) { return mean(gelu(t.param(ps[0]))); };

  ps.zero_grad();
  { Tape t; t.backward(loss_a(t)); }
  { Tape t; t.backward(loss_b(t)); }
  const auto separate = ps[0].grad;

  ps.zero_grad();
  { Tape t; t.backward(add(loss_a(t), loss_b(t))); }
  for (std::size_t i = 0; i < separate.size(); ++i) CHECK(std::abs(separate[i] - ps[0].grad[i]) < 1e-15);
}

TEST_CASE("forward is bit-identical across evaluations") {
  Rng rng(23);
  Tensor q = uniform_tensor(rng, {5, 8}, -1.0, 1.0);
  Tensor k = uniform_tensor(rng, {3, 8}, -1.0, 1.0);
  auto run = [&] {
    Tape t;
    return attention(t.constant(q), t.constant(k), t.constant(k), 2).value();
  };
  CHECK(run() == run());
}

TEST_CASE("non-finite forward results fail fast naming the op") {
  Tape t;
  auto x = t.constant(Tensor::matrix({{1e308, 1e308}}));
  try {
    scale(x, 10.0);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("scale") != std::string::npos);
  }
}

TEST_CASE("attention with a single key puts all weight on it") {
  Rng rng(2);
  Tensor q = uniform_tensor(rng, {4, 8}, -1.0, 1.0);
  Tensor k = uniform_tensor(rng, {1, 8}, -1.0, 1.0);
  for (std::size_t h = 0; h < 2; ++h) {
    Tensor p = attention_probs(q, k, 2, h);
    for (double v : p.data()) CHECK(v == 1.0);
  }
}

TEST_CASE("Adam moves parameters against the gradient") {
  ParamSet ps;
  ps.add("x", Tensor::matrix({{1.0, -1.0}}));
  Adam opt(ps, AdamConfig{0.1});
  for (int i = 0; i < 200; ++i) {
    Tape t;
    auto x = t.param(ps[0]);
    t.backward(sum(mul(x, x)));
    opt.step(ps);
  }
  CHECK(std::abs(ps[0].value[0]) < 0.05);
  CHECK(std::abs(ps[0].value[1]) < 0.05);
}
