// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "jgkd/ad/param.hpp"

#include "jgkd/errors.hpp"

namespace jgkd::ad {

std::size_t ParamSet::add(std::string name, Tensor init) {
  if (find(name)) throw ValidationError("duplicate parameter name '" + name + "'");
  Parameter p{std::move(name), std::move(init), {}};
  p.zero_grad();
  params_.push_back(std::move(p));
  return params_.size() - 1;
}

std::optional<std::size_t> ParamSet::find(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t ParamSet::index_of(const std::string& name) const {
  auto i = find(name);
  if (!i) throw ValidationError("no parameter named '" + name + "'");
  return *i;
}

void ParamSet::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

std::size_t ParamSet::num_scalars() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

std::uint64_t ParamSet::checksum() const {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (const auto& p : params_) h = ad::checksum(p.value.data(), h);
  return h;
}

std::vector<Tensor> ParamSet::snapshot() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.value);
  return out;
}

void ParamSet::restore(const std::vector<Tensor>& values) {
  if (values.size() != params_.size()) throw ShapeError("snapshot size does not match parameter set");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (values[i].shape() != params_[i].value.shape()) {
      throw ShapeError("snapshot shape mismatch for '" + params_[i].name + "'");
    }
    params_[i].value = values[i];
  }
}

}  // namespace jgkd::ad
