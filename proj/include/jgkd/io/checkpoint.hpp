// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "jgkd/ad/param.hpp"

namespace jgkd::io {

// Binary named-array container shared by teacher and student checkpoints.
//
//   bytes 0-3   magic "JGKD"
//   u16         format version
//   u64         array count
//   per array:  u64 name length, UTF-8 name, u64 rank, rank x u64 dims,
//               f64 row-major data
//
// All integers and floats are little-endian. Configuration travels as
// rank-0 arrays under the "meta/" prefix.
inline constexpr std::uint16_t kCheckpointVersion = 1;

using NamedArray = std::pair<std::string, ad::Tensor>;

void write_arrays(const std::filesystem::path& path, const std::vector<NamedArray>& arrays);
// Throws FormatError on a bad magic, unknown version or truncated data.
std::vector<NamedArray> read_arrays(const std::filesystem::path& path);

// Helpers for building and reading checkpoint contents.
class ArrayWriter {
 public:
  void meta(const std::string& key, double value);
  void params(const std::string& prefix, const ad::ParamSet& ps);
  const std::vector<NamedArray>& arrays() const { return arrays_; }

 private:
  std::vector<NamedArray> arrays_;
};

class ArrayReader {
 public:
  explicit ArrayReader(std::vector<NamedArray> arrays) : arrays_(std::move(arrays)) {}

  bool has(const std::string& name) const;
  double meta(const std::string& key) const;
  // Names of "meta/<group>/<index>/<name>" entries, ordered by index.
  std::vector<std::string> names(const std::string& group) const;
  // Overwrites every parameter of `ps` from "<prefix>/<param name>",
  // checking shapes. Extra arrays under the prefix are an error.
  void load_params(const std::string& prefix, ad::ParamSet& ps) const;

 private:
  const ad::Tensor& get(const std::string& name) const;
  std::vector<NamedArray> arrays_;
};

}  // namespace jgkd::io
