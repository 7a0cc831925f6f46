// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "jgkd/ad/param.hpp"
#include "jgkd/ad/tensor.hpp"

namespace jgkd::ad {

class Tape;

// Lightweight handle to a node recorded on a tape.
struct Var {
  Tape* tape = nullptr;
  std::uint32_t id = 0;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  double item() const;
};

// Receives the node it belongs to and its upstream gradient, and adds
// contributions into the gradients of that node's inputs.
using BackwardFn = std::function<void(Tape&, Var out, std::span<const double> grad_out)>;

// Records operations in execution order; backward() replays them in reverse.
// A tape is confined to one thread at a time.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Leaf with its own gradient buffer (read back through grad()).
  Var input(Tensor value, bool requires_grad = true);
  // Leaf bound to a parameter; backward() adds into param.grad.
  Var param(Parameter& p);

  Var record(const char* op, Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
  Var record(const char* op, Tensor value, std::span<const Var> inputs, BackwardFn backward);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  const char* op(Var v) const { return nodes_[v.id].op; }
  std::size_t size() const { return nodes_.size(); }

  // Gradient of the last backward() pass with respect to v (zeros if none).
  std::vector<double> grad(Var v) const;

  // Add `contribution` into the gradient buffer of v. No-op for nodes that
  // do not require grad.
  void accumulate(Var v, std::span<const double> contribution);
  // Direct access to v's gradient buffer, allocated on first use.
  std::span<double> grad_buffer(Var v);

  // Reverse-mode sweep from a scalar node. Parameter leaves receive their
  // gradient added into Parameter::grad.
  void backward(Var loss);

 private:
  struct Node {
    const char* op;
    Tensor value;
    bool requires_grad = false;
    BackwardFn backward;
    Parameter* param = nullptr;
  };

  Var push(Node node);

  std::deque<Node> nodes_;  // deque: references to values stay valid as the tape grows
  std::vector<std::vector<double>> grads_;
  std::unordered_map<const Parameter*, std::uint32_t> param_ids_;
};

// Test hook: multiplies the upstream gradient seen by every backward rule of
// the named op by `factor`. Used to prove the gradient checker catches
// defective rules. Pass an empty name to clear.
void set_backward_defect(const std::string& op, double factor);

}  // namespace jgkd::ad
