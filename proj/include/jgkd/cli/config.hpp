// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "jgkd/corpus/generator.hpp"
#include "jgkd/harness/training.hpp"
#include "jgkd/teachers/teacher.hpp"

namespace jgkd::cli {

struct KeySpec {
  std::string name;
  std::string default_value;
  std::string help;
};

// Every accepted key in documentation order.
const std::vector<KeySpec>& config_keys();

// Flat key=value run configuration. Lines are "key = value"; '#' starts a
// comment. Precedence, lowest first: defaults, config file, --set overrides,
// dedicated flags (--seed, --variant, --losses, --threads).
class RunConfig {
 public:
  RunConfig();  // all defaults

  static RunConfig parse(const std::string& text);  // throws ConfigError
  static RunConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);  // throws ConfigError on unknown keys
  void set_assignment(const std::string& assignment);         // "key=value"
  const std::string& get(const std::string& key) const;

  std::string get_string(const std::string& key) const { return get(key); }
  double get_double(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;  // comma separated, empty allowed

  // Every key with its resolved value, in documentation order.
  std::string render() const;
  void write(const std::filesystem::path& path) const;

  // Typed views. All throw ConfigError on malformed values.
  corpus::SchemaId schema() const;
  corpus::GenSpec gen_spec() const;
  std::array<double, 3> split_fractions() const;
  std::uint64_t seed() const { return get_u64("seed"); }
  std::uint64_t corpus_seed() const;
  std::uint64_t teacher_seed() const;
  // fine_a, fine_b, coarse_a, coarse_b, then the untrained "transformer".
  std::vector<teachers::TeacherConfig> teacher_configs() const;
  student::StudentConfig student_config() const;  // rosters left empty
  std::vector<std::string> fine_teachers() const { return get_list("student.fine_teachers"); }
  std::vector<std::string> coarse_teachers() const { return get_list("student.coarse_teachers"); }
  losses::LossWeights loss_weights() const;
  harness::TrainSpec train_spec() const;
  std::vector<std::uint64_t> ablation_seeds() const;
  std::size_t threads() const;

  // Checks every typed view once.
  void validate() const;

 private:
  std::map<std::string, std::string> values_;
};

// Help text listing every key, its default and description.
std::string describe_keys();

}  // namespace jgkd::cli
