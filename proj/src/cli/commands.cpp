// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "jgkd/cli/commands.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>

#include "jgkd/cli/selfcheck.hpp"
#include "jgkd/corpus/io.hpp"
#include "jgkd/errors.hpp"

namespace jgkd::cli {

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory '" + dir.string() + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::vector<teachers::Teacher> train_pool(const RunConfig& cfg, const corpus::Corpus& train, std::ostream& log) {
  std::vector<teachers::Teacher> pool;
  for (const auto& tc : cfg.teacher_configs()) {
    auto trained = teachers::train_teacher(train, tc);
    log << "teacher " << tc.name << " (" << teachers::grain_name(tc.grain) << ", d=" << tc.dim << ") trained for "
        << trained.history.size() << " epochs\n";
    pool.push_back(std::move(trained.teacher));
  }
  return pool;
}

teachers::Teacher load_named(const RunConfig& cfg, const fs::path& dir, const std::string& name,
                             teachers::Grain grain) {
  const fs::path path = dir / teacher_file(name);
  if (!fs::exists(path)) {
    for (const auto& tc : cfg.teacher_configs()) {
      if (tc.name == name && tc.epochs == 0 && tc.grain == grain) {
        teachers::Teacher t(tc);
        t.freeze();
        return t;
      }
    }
    throw IoError("teacher checkpoint '" + path.string() + "' not found");
  }
  teachers::Teacher t = teachers::load_teacher(path, grain);
  if (t.config().schema != cfg.schema()) {
    throw ConfigError("teacher '" + name + "' was trained for a different schema");
  }
  return t;
}

const corpus::Corpus& pick_split(const corpus::CorpusSplit& s, const std::string& split) {
  if (split == "train") return s.train;
  if (split == "val") return s.val;
  if (split == "test") return s.test;
  throw ValidationError("unknown split '" + split + "' (expected train, val or test)");
}

}  // namespace

std::string split_file(const std::string& split) { return split + ".jsonl"; }
std::string teacher_file(const std::string& name) { return name + ".ckpt"; }

corpus::CorpusSplit load_splits(const fs::path& corpus_dir) {
  corpus::CorpusSplit s;
  s.train = corpus::read_corpus(corpus_dir / split_file("train"));
  s.val = corpus::read_corpus(corpus_dir / split_file("val"));
  s.test = corpus::read_corpus(corpus_dir / split_file("test"));
  return s;
}

corpus::CorpusSplit cmd_gen_data(const RunConfig& cfg, const fs::path& out) {
  cfg.validate();
  ensure_dir(out);
  const corpus::Corpus all = corpus::generate_corpus(cfg.gen_spec(), cfg.corpus_seed());
  corpus::CorpusSplit s = corpus::split_corpus(all, cfg.split_fractions(), cfg.corpus_seed());
  corpus::write_corpus(out / split_file("train"), s.train);
  corpus::write_corpus(out / split_file("val"), s.val);
  corpus::write_corpus(out / split_file("test"), s.test);
  cfg.write(out / kConfigFile);
  return s;
}

void cmd_train_teachers(const RunConfig& cfg, const fs::path& corpus_dir, const fs::path& out, std::ostream& log) {
  cfg.validate();
  const corpus::CorpusSplit s = load_splits(corpus_dir);
  if (s.train.empty() || s.test.empty()) throw ValidationError("train and test splits must be nonempty");
  ensure_dir(out);
  nlohmann::ordered_json summary = nlohmann::ordered_json::array();
  for (const auto& tc : cfg.teacher_configs()) {
    if (tc.epochs == 0) continue;
    auto trained = teachers::train_teacher(s.train, tc);
    const auto& t = trained.teacher;
    teachers::save_teacher(t, out / teacher_file(tc.name));
    nlohmann::ordered_json j;
    j["name"] = tc.name;
    j["grain"] = teachers::grain_name(tc.grain);
    j["dim"] = tc.dim;
    j["epochs"] = trained.history.size();
    j["final_train_loss"] = trained.history.empty() ? 0.0 : trained.history.back().loss;
    j["test_f1"] = teachers::teacher_f1(t, s.test);
    j["test_token_f1"] = teachers::teacher_token_f1(t, s.test);
    log << "teacher " << tc.name << ": test F1 " << fixed(j["test_f1"].get<double>()) << ", token F1 "
        << fixed(j["test_token_f1"].get<double>()) << "\n";
    summary.push_back(j);
  }
  write_text(out / kTeacherSummary, summary.dump(2) + "\n");
  cfg.write(out / kConfigFile);
}

harness::TeacherSet load_teacher_set(const RunConfig& cfg, const fs::path& teacher_dir) {
  harness::TeacherSet set;
  for (const auto& n : cfg.fine_teachers()) set.fine.push_back(load_named(cfg, teacher_dir, n, teachers::Grain::kFine));
  for (const auto& n : cfg.coarse_teachers()) {
    set.coarse.push_back(load_named(cfg, teacher_dir, n, teachers::Grain::kCoarse));
  }
  if (set.fine.empty() || set.coarse.empty()) throw ConfigError("student rosters need fine and coarse teachers");
  return set;
}

harness::Metrics cmd_train_student(const RunConfig& cfg, const fs::path& corpus_dir, const fs::path& teacher_dir,
                                   const fs::path& out, std::ostream& log) {
  cfg.validate();
  const harness::TeacherSet set = load_teacher_set(cfg, teacher_dir);
  const auto scfg = harness::configure_student(cfg.student_config(), set, cfg.schema());
  const auto weights = cfg.loss_weights();
  harness::check_loss_roster(scfg, weights);
  const corpus::CorpusSplit s = load_splits(corpus_dir);
  ensure_dir(out);

  const harness::TrainResult r = harness::train_student(s.train, s.val, set, scfg, weights, cfg.train_spec());
  const harness::Metrics m = harness::evaluate(r.student, set, s.test);
  student::save_student(r.student, out / kStudentCheckpoint);
  harness::write_history(r.history, out / kHistoryFile);
  write_text(out / kMetricsFile, harness::metrics_json(m, cfg.schema()));
  cfg.write(out / kConfigFile);
  log << "student " << student::variant_name(scfg.variant) << ": best epoch " << r.best_epoch << " of "
      << r.history.epochs.size() << ", val token F1 " << fixed(r.best_val_f1) << ", test token F1 "
      << fixed(m.token.micro_f1) << ", test entity F1 " << fixed(m.entity.micro_f1) << "\n";
  return m;
}

harness::Metrics cmd_eval(const RunConfig& cfg, const fs::path& corpus_dir, const fs::path& teacher_dir,
                          const fs::path& student_path, const std::string& split, const fs::path& out) {
  cfg.validate();
  const corpus::CorpusSplit s = load_splits(corpus_dir);
  const corpus::Corpus& pages = pick_split(s, split);
  const student::Student st = student::load_student(student_path);
  RunConfig resolved = cfg;
  auto join = [](const std::vector<std::string>& v) {
    std::string out;
    for (const auto& x : v) out += (out.empty() ? "" : ",") + x;
    return out;
  };
  if (!st.config().fine_names.empty()) resolved.set("student.fine_teachers", join(st.config().fine_names));
  if (!st.config().coarse_names.empty()) resolved.set("student.coarse_teachers", join(st.config().coarse_names));
  const harness::TeacherSet set = load_teacher_set(resolved, teacher_dir);
  const harness::Metrics m = harness::evaluate(st, set, pages);
  ensure_dir(out);
  write_text(out / kMetricsFile, harness::metrics_json(m, cfg.schema()));
  resolved.write(out / kConfigFile);
  return m;
}

harness::AblationReport cmd_ablate(const RunConfig& cfg, const std::string& which, const fs::path& corpus_dir,
                                   const fs::path& teacher_dir, const fs::path& out, std::ostream& log) {
  if (which != "losses" && which != "teachers" && which != "architecture") {
    throw ValidationError("unknown ablation '" + which + "' (expected losses, teachers or architecture)");
  }
  cfg.validate();
  ensure_dir(out);
  harness::AblationSetup setup;
  setup.schema = cfg.schema();
  corpus::CorpusSplit s;
  if (corpus_dir.empty()) {
    s = corpus::split_corpus(corpus::generate_corpus(cfg.gen_spec(), cfg.corpus_seed()), cfg.split_fractions(),
                             cfg.corpus_seed());
  } else {
    s = load_splits(corpus_dir);
  }
  setup.train = std::move(s.train);
  setup.val = std::move(s.val);
  setup.test = std::move(s.test);
  if (teacher_dir.empty()) {
    setup.pool = train_pool(cfg, setup.train, log);
  } else {
    for (const auto& tc : cfg.teacher_configs()) setup.pool.push_back(load_named(cfg, teacher_dir, tc.name, tc.grain));
  }
  setup.student = cfg.student_config();
  setup.spec = cfg.train_spec();
  setup.seeds = cfg.ablation_seeds();
  setup.threads = cfg.threads();
  const losses::LossWeights configured = cfg.loss_weights();
  setup.weights = losses::LossWeights::task_only();
  setup.weights.task_fine = configured.task_fine;
  setup.weights.task_coarse = configured.task_coarse;

  harness::AblationReport report;
  if (which == "losses") {
    setup.weights = configured;
    report = harness::ablate_losses(setup, harness::default_loss_combos());
  } else if (which == "teachers") {
    report = harness::ablate_teachers(setup, harness::default_rosters());
  } else {
    report = harness::ablate_architecture(setup, harness::default_architectures());
  }
  harness::emit_report(report, out / (which + ".csv"), harness::ReportFormat::kCsv);
  harness::emit_report(report, out / (which + ".jsonl"), harness::ReportFormat::kJsonl);
  cfg.write(out / kConfigFile);
  for (const auto& row : report.rows) {
    log << which << " " << row.config << ": token F1 " << fixed(row.median.token.micro_f1) << ", entity F1 "
        << fixed(row.median.entity.micro_f1) << "\n";
  }
  return report;
}

int cmd_selfcheck(const std::optional<std::string>& defect, std::ostream& out) {
  return report_selfcheck(run_selfcheck(1, defect), out) ? 0 : 2;
}

int exit_code(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return static_cast<int>(err->kind());
  if (dynamic_cast<const std::bad_alloc*>(&e)) return 2;
  return 1;
}

}  // namespace jgkd::cli
