// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "jgkd/ad/tape.hpp"

#include <mutex>

#include "jgkd/errors.hpp"

namespace jgkd::ad {

namespace {

struct Defect {
  std::mutex mu;
  std::string op;
  double factor = 1.0;
};

Defect& defect() {
  static Defect d;
  return d;
}

}  // namespace

void set_backward_defect(const std::string& op, double factor) {
  auto& d = defect();
  std::lock_guard lock(d.mu);
  d.op = op;
  d.factor = factor;
}

const Tensor& Var::value() const { return tape->value(*this); }

double Var::item() const {
  const Tensor& t = value();
  if (t.size() != 1) throw ContractError("item() on non-scalar of shape " + shape_str(t.shape()));
  return t[0];
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::constant(Tensor value) {
  if (!value.all_finite()) throw NumericError("non-finite value in constant");
  return push(Node{"constant", std::move(value), false, {}, nullptr});
}

Var Tape::input(Tensor value, bool requires_grad) {
  if (!value.all_finite()) throw NumericError("non-finite value in input");
  return push(Node{"input", std::move(value), requires_grad, {}, nullptr});
}

Var Tape::param(Parameter& p) {
  if (auto it = param_ids_.find(&p); it != param_ids_.end()) return Var{this, it->second};
  if (!p.value.all_finite()) throw NumericError("non-finite value in parameter '" + p.name + "'");
  Var v = push(Node{"param", p.value, true, {}, &p});
  param_ids_.emplace(&p, v.id);
  return v;
}

Var Tape::record(const char* op, Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
  return record(op, std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backward));
}

Var Tape::record(const char* op, Tensor value, std::span<const Var> inputs, BackwardFn backward) {
  if (!value.all_finite()) throw NumericError(std::string("non-finite value produced by ") + op);
  bool rg = false;
  for (const Var& in : inputs) {
    if (in.tape != this) throw ContractError(std::string(op) + ": operand recorded on a different tape");
    rg = rg || nodes_[in.id].requires_grad;
  }
  return push(Node{op, std::move(value), rg, rg ? std::move(backward) : BackwardFn{}, nullptr});
}

std::vector<double> Tape::grad(Var v) const {
  if (v.id < grads_.size() && !grads_[v.id].empty()) return grads_[v.id];
  return std::vector<double>(nodes_[v.id].value.size(), 0.0);
}

std::span<double> Tape::grad_buffer(Var v) {
  if (grads_.size() < nodes_.size()) grads_.resize(nodes_.size());
  auto& g = grads_[v.id];
  if (g.empty()) g.assign(nodes_[v.id].value.size(), 0.0);
  return g;
}

void Tape::accumulate(Var v, std::span<const double> contribution) {
  if (!nodes_[v.id].requires_grad) return;
  auto g = grad_buffer(v);
  if (contribution.size() != g.size()) throw ShapeError("gradient contribution size mismatch");
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += contribution[i];
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw ContractError("backward: loss belongs to a different tape");
  const Tensor& lv = nodes_[loss.id].value;
  if (lv.size() != 1) throw ContractError("backward requires a scalar loss, got shape " + shape_str(lv.shape()));

  grads_.assign(nodes_.size(), {});
  if (!nodes_[loss.id].requires_grad) return;
  grad_buffer(loss)[0] = 1.0;

  std::string defect_op;
  double defect_factor = 1.0;
  {
    auto& d = defect();
    std::lock_guard lock(d.mu);
    defect_op = d.op;
    defect_factor = d.factor;
  }

  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.requires_grad || grads_[i].empty()) continue;
    if (node.param) {
      auto& pg = node.param->grad;
      if (pg.size() != grads_[i].size()) pg.assign(grads_[i].size(), 0.0);
      for (std::size_t j = 0; j < pg.size(); ++j) pg[j] += grads_[i][j];
      continue;
    }
    if (!node.backward) continue;
    if (!defect_op.empty() && defect_op == node.op) {
      std::vector<double> scaled = grads_[i];
      for (double& g : scaled) g *= defect_factor;
      node.backward(*this, Var{this, static_cast<std::uint32_t>(i)}, scaled);
    } else {
      // The rule may grow grads_ only through grad_buffer, which never
      // reallocates once sized, so this span stays valid.
      node.backward(*this, Var{this, static_cast<std::uint32_t>(i)}, grads_[i]);
    }
  }
}

}  // namespace jgkd::ad
