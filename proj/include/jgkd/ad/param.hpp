// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jgkd/ad/tensor.hpp"

namespace jgkd::ad {

// A learnable leaf: value plus an accumulated gradient of the same size.
struct Parameter {
  std::string name;
  Tensor value;
  std::vector<double> grad;

  void zero_grad() { grad.assign(value.size(), 0.0); }
};

// Ordered, name-addressable parameter collection. Modules refer to their
// parameters by index so the whole set can be copied by value.
class ParamSet {
 public:
  std::size_t add(std::string name, Tensor init);

  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  std::size_t size() const { return params_.size(); }
  bool empty() const { return params_.empty(); }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  std::optional<std::size_t> find(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;

  void zero_grad();
  std::size_t num_scalars() const;
  std::uint64_t checksum() const;

  std::vector<Tensor> snapshot() const;
  void restore(const std::vector<Tensor>& values);

 private:
  std::vector<Parameter> params_;
};

}  // namespace jgkd::ad
