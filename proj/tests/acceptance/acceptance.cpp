// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

// One PASS/FAIL line per acceptance criterion. Soft criteria print WARN
// instead of FAIL and do not affect the exit status.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "jgkd/cli/commands.hpp"
#include "jgkd/cli/selfcheck.hpp"
#include "jgkd/corpus/io.hpp"
#include "jgkd/errors.hpp"
#include "jgkd/losses/oracle.hpp"

using namespace jgkd;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kGradTol = 1e-3;
constexpr double kSelfcheckSeconds = 60;
constexpr double kConvergenceF1 = 0.95;
constexpr std::size_t kMaxEpochs = 50;
constexpr double kConvergenceSeconds = 600;
constexpr double kNoiseRate = 0.3;
const std::vector<std::uint64_t> kSeeds = {1, 2, 3};

struct Outcome {
  bool passed;
  std::string detail;
};

int g_failures = 0;

void report(const std::string& name, const Outcome& o, bool soft = false) {
  const char* tag = o.passed ? "PASS" : soft ? "WARN" : "FAIL";
  std::cout << tag << " " << name << ": " << o.detail << std::endl;
  if (!o.passed && !soft) ++g_failures;
}

void run(const std::string& name, const std::function<Outcome()>& fn, bool soft = false) {
  try {
    report(name, fn(), soft);
  } catch (const std::exception& e) {
    report(name, {false, std::string("exception: ") + e.what()}, soft);
  }
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("jgkd_acceptance_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read '" + p.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Small settings for the structural and determinism runs.
cli::RunConfig reduced_config() {
  return cli::RunConfig::parse(
      "corpus.pages = 40\n"
      "teacher.heads = 2\n"
      "teacher.epochs = 4\n"
      "teacher.fine_a_dim = 12\n"
      "teacher.fine_b_dim = 10\n"
      "teacher.coarse_a_dim = 10\n"
      "teacher.coarse_b_dim = 8\n"
      "teacher.transformer_dim = 8\n"
      "student.dim = 16\n"
      "student.heads = 2\n"
      "student.encoder_layers = 1\n"
      "student.decoder_layers = 1\n"
      "train.max_epochs = 4\n"
      "ablate.seeds = 1,2\n");
}

// Corpus, teachers and students of one end-to-end run.
struct Pipeline {
  corpus::CorpusSplit split;
  harness::TeacherSet teachers;
  std::vector<teachers::Teacher> pool;
  std::vector<harness::TrainResult> students;
  std::vector<double> test_f1;
  std::vector<std::size_t> epochs;
  double seconds = 0;
};

Pipeline run_pipeline(const cli::RunConfig& cfg) {
  const auto t0 = Clock::now();
  Pipeline p;
  p.split = corpus::split_corpus(corpus::generate_corpus(cfg.gen_spec(), cfg.corpus_seed()), cfg.split_fractions(),
                                 cfg.corpus_seed());
  for (const auto& tc : cfg.teacher_configs()) {
    if (tc.epochs == 0) continue;
    p.pool.push_back(teachers::train_teacher(p.split.train, tc).teacher);
  }
  const auto fine = cfg.fine_teachers();
  const auto coarse = cfg.coarse_teachers();
  for (const auto& t : p.pool) {
    const auto& names = t.grain() == teachers::Grain::kFine ? fine : coarse;
    if (std::find(names.begin(), names.end(), t.config().name) == names.end()) continue;
    (t.grain() == teachers::Grain::kFine ? p.teachers.fine : p.teachers.coarse).push_back(t);
  }
  const auto scfg = harness::configure_student(cfg.student_config(), p.teachers, cfg.schema());
  for (auto seed : kSeeds) {
    auto sc = scfg;
    sc.seed = derive_seed(seed, 0x57d);
    auto spec = cfg.train_spec();
    spec.seed = seed;
    auto r = harness::train_student(p.split.train, p.split.val, p.teachers, sc, cfg.loss_weights(), spec);
    p.test_f1.push_back(harness::evaluate(r.student, p.teachers, p.split.test).token.micro_f1);
    p.epochs.push_back(r.history.epochs.size());
    p.students.push_back(std::move(r));
  }
  p.seconds = seconds_since(t0);
  return p;
}

std::string join_f1(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : "/") + fmt("%.4f", x);
  return out;
}

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  const auto items = cli::run_selfcheck(1, std::nullopt);
  const double secs = seconds_since(t0);
  std::size_t checked = 0, failed = 0;
  double worst = 0;
  std::string worst_name;
  for (const auto& it : items) {
    if (it.group == "oracle") continue;
    ++checked;
    if (!it.passed || it.error >= kGradTol) ++failed;
    if (it.error >= worst) {
      worst = it.error;
      worst_name = it.group + "/" + it.name;
    }
  }
  const bool ok = failed == 0 && checked == ad::primitive_registry().size() + 9 && secs < kSelfcheckSeconds;
  return {ok, std::to_string(checked - failed) + "/" + std::to_string(checked) + " items within " +
                  fmt("%g", kGradTol) + ", worst " + worst_name + " " + fmt("%.2e", worst) + ", " +
                  fmt("%.2f", secs) + " s (limit " + fmt("%g", kSelfcheckSeconds) + " s)"};
}

Outcome oracle_table() {
  std::size_t passed = 0;
  std::string bad;
  const auto table = losses::loss_oracle_table();
  for (const auto& c : table) {
    if (c.passed()) {
      ++passed;
    } else {
      bad += " " + c.name;
    }
  }
  return {passed == table.size() && table.size() == 10,
          std::to_string(passed) + "/" + std::to_string(table.size()) + " rows" + (bad.empty() ? "" : ", failing:" + bad)};
}

Outcome convergence(const Pipeline& p) {
  const double med = median(p.test_f1);
  const std::size_t max_epochs = *std::max_element(p.epochs.begin(), p.epochs.end());
  const bool ok = med >= kConvergenceF1 && max_epochs <= kMaxEpochs && p.seconds < kConvergenceSeconds;
  return {ok, "token micro-F1 per seed " + join_f1(p.test_f1) + ", median " + fmt("%.4f", med) + " (>= " +
                  fmt("%.2f", kConvergenceF1) + "), at most " + std::to_string(max_epochs) + " epochs, " +
                  fmt("%.1f", p.seconds) + " s (limit " + fmt("%g", kConvergenceSeconds) + " s)"};
}

Outcome noisy_trend() {
  cli::RunConfig cfg;
  cfg.set("corpus.noise_rate", fmt("%g", kNoiseRate));
  const Pipeline p = run_pipeline(cfg);
  double best = 0, best_fine = 0;
  std::string best_name, best_fine_name;
  for (const auto& t : p.pool) {
    const double f1 = teachers::teacher_token_f1(t, p.split.test);
    if (f1 > best) {
      best = f1;
      best_name = t.config().name;
    }
    if (t.grain() == teachers::Grain::kFine && f1 > best_fine) {
      best_fine = f1;
      best_fine_name = t.config().name;
    }
  }
  const double med = median(p.test_f1);
  return {med >= best, "noise " + fmt("%g", kNoiseRate) + ": student median token F1 " + fmt("%.4f", med) +
                           " (seeds " + join_f1(p.test_f1) + ") vs best single teacher " + best_name + " " +
                           fmt("%.4f", best) + ", best fine teacher " + best_fine_name + " " + fmt("%.4f", best_fine)};
}

bool complete(const harness::Metrics& m, std::size_t labels) {
  auto level_ok = [&](const harness::LevelMetrics& l) {
    if (l.per_label.size() != labels) return false;
    for (const auto& s : l.per_label) {
      if (!std::isfinite(s.f1) || !std::isfinite(s.precision) || !std::isfinite(s.recall)) return false;
    }
    return std::isfinite(l.micro_f1) && l.micro_f1 >= 0 && l.micro_f1 <= 1;
  };
  return level_ok(m.token) && level_ok(m.entity);
}

// Expected row layout of each grid, in order.
const std::map<std::string, std::vector<std::string>>& expected_rows() {
  static const std::map<std::string, std::vector<std::string>> rows = {
      {"losses",
       {"sim", "distil", "triplet", "align", "sim+distil", "sim+triplet", "sim+align", "distil+triplet",
        "distil+align", "sim+distil+triplet", "sim+distil+align", "sim+distil+triplet+align"}},
      {"teachers",
       {"fine_a|coarse_a", "fine_a|coarse_b", "fine_a|transformer", "fine_b|coarse_a", "fine_b|coarse_b",
        "fine_b|transformer", "fine_a|coarse_a+coarse_b", "fine_a+fine_b|coarse_b",
        "fine_a+fine_b|coarse_a+coarse_b"}},
      {"architecture", {"JG-E", "JG-D", "JG-E&D", "MT-JG-E&D"}},
  };
  return rows;
}

Outcome ablation_grid(const std::string& which, const fs::path& corpus_dir, const fs::path& teacher_dir) {
  const cli::RunConfig cfg = reduced_config();
  const fs::path out = scratch("grid_" + which);
  std::ostringstream log;
  const auto report = cli::cmd_ablate(cfg, which, corpus_dir, teacher_dir, out, log);
  const auto& want = expected_rows().at(which);
  const std::size_t labels = corpus::schema(cfg.schema()).labels.size();
  std::vector<std::string> got;
  bool ok = true;
  for (const auto& row : report.rows) {
    got.push_back(row.config);
    ok = ok && row.runs.size() == cfg.ablation_seeds().size() && complete(row.median, labels);
    for (const auto& r : row.runs) ok = ok && complete(r.test, labels);
  }
  ok = ok && got == want;
  ok = ok && harness::read_report_csv(out / (which + ".csv")) == report;
  return {ok, std::to_string(report.rows.size()) + " rows (expected " + std::to_string(want.size()) + "), " +
                  std::to_string(cfg.ablation_seeds().size()) + " seeds each, metrics " +
                  (ok ? "complete" : "incomplete or misordered")};
}

Outcome funsd_counts(const fs::path& dir) {
  const auto pages = corpus::load_funsd(dir);
  const auto& schema = corpus::schema(corpus::SchemaId::kFunsd);
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
  std::size_t entities = 0, tokens = 0;
  for (const auto& p : pages) {
    for (const auto& e : p.entities) {
      auto& c = counts[schema.labels.at(e.label)];
      ++c.first;
      c.second += e.token_ids.size();
      ++entities;
      tokens += e.token_ids.size();
    }
  }
  const std::map<std::string, std::pair<std::size_t, std::size_t>> want = {
      {"question", {1077, 2654}}, {"answer", {821, 3294}}, {"header", {122, 374}}, {"other", {312, 2385}}};
  std::string detail = std::to_string(entities) + " entities, " + std::to_string(tokens) + " tokens;";
  for (const auto& [label, c] : counts) {
    detail += " " + label + " " + std::to_string(c.first) + "/" + std::to_string(c.second);
  }
  return {entities == 2332 && tokens == 8707 && counts == want, detail};
}

Outcome checkpoint_round_trip(const Pipeline& p) {
  const fs::path dir = scratch("checkpoints");
  fs::create_directories(dir);
  std::size_t compared = 0;
  bool ok = true;
  for (const auto& t : p.pool) {
    const fs::path path = dir / (t.config().name + ".ckpt");
    teachers::save_teacher(t, path);
    const auto back = teachers::load_teacher(path, t.grain());
    ok = ok && back.checksum() == t.checksum();
    for (const auto& page : p.split.test) {
      const auto a = t.infer(page), b = back.infer(page);
      ok = ok && a.hidden.values() == b.hidden.values() && a.logits.values() == b.logits.values();
      ++compared;
    }
  }
  const auto& s = p.students.front().student;
  student::save_student(s, dir / "student.ckpt");
  const auto back = student::load_student(dir / "student.ckpt");
  ok = ok && back.params().checksum() == s.params().checksum();
  for (const auto& page : p.split.test) {
    const auto outs = p.teachers.outputs(page);
    const auto a = s.trace(outs), b = back.trace(outs);
    for (auto field : {&student::ForwardTrace::t_hat, &student::ForwardTrace::e_hat, &student::ForwardTrace::t_enc,
                       &student::ForwardTrace::e_enc, &student::ForwardTrace::t, &student::ForwardTrace::e,
                       &student::ForwardTrace::p_t, &student::ForwardTrace::p_e, &student::ForwardTrace::p_align}) {
      ok = ok && (a.*field).values() == (b.*field).values();
    }
    ++compared;
  }
  ok = ok && harness::evaluate(back, p.teachers, p.split.test) == harness::evaluate(s, p.teachers, p.split.test);
  return {ok, std::to_string(p.pool.size()) + " teachers and 1 student, " + std::to_string(compared) +
                  " page inferences " + (ok ? "bit-identical" : "differ")};
}

// gen-data, train-teachers, train-student, eval and one ablation grid.
void full_run(const cli::RunConfig& cfg, const fs::path& root) {
  std::ostringstream log;
  cli::cmd_gen_data(cfg, root / "data");
  cli::cmd_train_teachers(cfg, root / "data", root / "teachers", log);
  cli::cmd_train_student(cfg, root / "data", root / "teachers", root / "student", log);
  cli::cmd_eval(cfg, root / "data", root / "teachers", root / "student" / cli::kStudentCheckpoint, "val",
                root / "eval");
  cli::cmd_ablate(cfg, "architecture", root / "data", root / "teachers", root / "ablate", log);
}

Outcome determinism() {
  const cli::RunConfig cfg = reduced_config();
  const fs::path a = scratch("determinism_a"), b = scratch("determinism_b");
  full_run(cfg, a);
  full_run(cfg, b);
  std::size_t files = 0;
  std::vector<std::string> differ;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a);
    ++files;
    if (!fs::exists(b / rel) || slurp(e.path()) != slurp(b / rel)) differ.push_back(rel.string());
  }
  std::string detail = std::to_string(files) + " output files compared";
  for (const auto& d : differ) detail += ", differs: " + d;
  const bool has_metrics = fs::exists(a / "student" / cli::kMetricsFile) && fs::exists(a / "eval" / cli::kMetricsFile);
  return {differ.empty() && has_metrics && files > 0, detail + (differ.empty() ? ", byte-identical" : "")};
}

}  // namespace

int main() {
  std::cout << "jgkd acceptance suite" << std::endl;
  run("gradient_suite", gradient_suite);
  run("loss_oracle_table", oracle_table);

  std::optional<Pipeline> clean;
  try {
    clean = run_pipeline(cli::RunConfig());
  } catch (const std::exception& e) {
    report("end_to_end_convergence", {false, std::string("exception: ") + e.what()});
  }
  if (clean) run("end_to_end_convergence", [&] { return convergence(*clean); });

  run("noisy_trend", noisy_trend, true);

  {
    const cli::RunConfig cfg = reduced_config();
    const fs::path data = scratch("ablate_data"), teachers = scratch("ablate_teachers");
    std::ostringstream log;
    cli::cmd_gen_data(cfg, data);
    cli::cmd_train_teachers(cfg, data, teachers, log);
    for (const char* which : {"losses", "teachers", "architecture"}) {
      run(std::string("ablation_") + which, [&] { return ablation_grid(which, data, teachers); });
    }
  }

  if (const char* dir = std::getenv("JGKD_FUNSD_TEST_DIR"); dir && *dir) {
    run("funsd_test_counts", [&] { return funsd_counts(dir); });
  } else {
    std::cout << "SKIP funsd_test_counts: set JGKD_FUNSD_TEST_DIR to a FUNSD testing_data/annotations directory"
              << std::endl;
  }

  if (clean) {
    run("checkpoint_round_trip", [&] { return checkpoint_round_trip(*clean); });
  } else {
    report("checkpoint_round_trip", {false, "no trained models (pipeline failed)"});
  }
  run("determinism", determinism);

  fs::remove_all(fs::temp_directory_path() / ("jgkd_acceptance_" + std::to_string(::getpid())));
  std::cout << (g_failures ? "acceptance FAILED: " : "acceptance passed: ") << g_failures << " failing criteria"
            << std::endl;
  return g_failures ? 1 : 0;
}
