// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "jgkd/cli/config.hpp"
#include "jgkd/harness/report.hpp"

namespace jgkd::cli {

namespace fs = std::filesystem;

// File names inside command directories.
inline constexpr const char* kConfigFile = "config.txt";
inline constexpr const char* kTeacherSummary = "teachers.json";
inline constexpr const char* kStudentCheckpoint = "student.ckpt";
inline constexpr const char* kHistoryFile = "history.jsonl";
inline constexpr const char* kMetricsFile = "metrics.json";

std::string split_file(const std::string& split);             // "train" -> "train.jsonl"
std::string teacher_file(const std::string& name);            // "fine_a" -> "fine_a.ckpt"
corpus::CorpusSplit load_splits(const fs::path& corpus_dir);  // throws IoError

// Generates the corpus and writes train/val/test splits plus the resolved config.
corpus::CorpusSplit cmd_gen_data(const RunConfig& cfg, const fs::path& out);

// Trains the four default teachers on the training split and writes one
// checkpoint each plus a summary of their test-split F1.
void cmd_train_teachers(const RunConfig& cfg, const fs::path& corpus_dir, const fs::path& out, std::ostream& log);

// Loads the configured rosters from teacher_dir. The untrained "transformer"
// teacher is rebuilt from the config when it has no checkpoint.
harness::TeacherSet load_teacher_set(const RunConfig& cfg, const fs::path& teacher_dir);

// Trains the student and writes checkpoint, history and test metrics.
harness::Metrics cmd_train_student(const RunConfig& cfg, const fs::path& corpus_dir, const fs::path& teacher_dir,
                                   const fs::path& out, std::ostream& log);

// Scores a saved student on one split and writes metrics.json into out.
harness::Metrics cmd_eval(const RunConfig& cfg, const fs::path& corpus_dir, const fs::path& teacher_dir,
                          const fs::path& student_path, const std::string& split, const fs::path& out);

// which: losses | teachers | architecture. Empty corpus_dir generates the
// corpus from the config; empty teacher_dir trains the teacher pool in-process.
harness::AblationReport cmd_ablate(const RunConfig& cfg, const std::string& which, const fs::path& corpus_dir,
                                   const fs::path& teacher_dir, const fs::path& out, std::ostream& log);

// Returns the process exit status: 0 when every check passes, 2 otherwise.
int cmd_selfcheck(const std::optional<std::string>& defect, std::ostream& out);

// 1 validation/config, 2 numeric, 3 I/O.
int exit_code(const std::exception& e);

}  // namespace jgkd::cli
