// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "jgkd/harness/ablation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <set>
#include <thread>

#include "jgkd/errors.hpp"

namespace jgkd::harness {

namespace {

struct Job {
  std::string config;
  std::uint64_t seed = 0;
  student::StudentConfig student;
  losses::LossWeights weights;
  Roster roster;
};

RunResult run_job(const AblationSetup& setup, const Job& job) {
  const TeacherSet teachers = setup.teacher_set(job.roster.fine, job.roster.coarse);
  student::StudentConfig cfg = configure_student(job.student, teachers, setup.schema);
  cfg.seed = derive_seed(job.seed, 0x57d);
  TrainSpec spec = setup.spec;
  spec.seed = job.seed;

  RunResult r;
  r.config = job.config;
  r.seed = job.seed;
  r.teacher_checksum_before = teachers.checksum();
  const TrainResult tr = train_student(setup.train, setup.val, teachers, cfg, job.weights, spec);
  r.teacher_checksum_after = teachers.checksum();
  r.best_epoch = tr.best_epoch;
  r.test = evaluate(tr.student, teachers, setup.test);
  return r;
}

// Runs jobs on up to `threads` workers; results keep job order.
std::vector<RunResult> run_jobs(const AblationSetup& setup, const std::vector<Job>& jobs) {
  std::vector<RunResult> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        results[i] = run_job(setup, jobs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n = std::clamp<std::size_t>(setup.threads, 1, std::max<std::size_t>(jobs.size(), 1));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

void check_setup(const AblationSetup& setup) {
  if (setup.seeds.empty()) throw ConfigError("ablation needs at least one seed");
  if (setup.train.empty() || setup.val.empty() || setup.test.empty()) {
    throw ValidationError("ablation needs nonempty train, val and test splits");
  }
}

void check_unique(const std::vector<std::string>& names) {
  std::set<std::string> seen;
  for (const auto& n : names) {
    if (!seen.insert(n).second) throw ValidationError("duplicate ablation configuration '" + n + "'");
  }
}

AblationReport assemble(const AblationSetup& setup, std::string kind, const std::vector<Job>& jobs) {
  const auto results = run_jobs(setup, jobs);
  AblationReport report{std::move(kind), setup.schema, {}};
  for (const auto& r : results) {
    if (report.rows.empty() || report.rows.back().config != r.config) report.rows.push_back({r.config, {}, {}});
    report.rows.back().runs.push_back(r);
  }
  for (auto& row : report.rows) {
    std::vector<Metrics> ms;
    for (const auto& r : row.runs) ms.push_back(r.test);
    row.median = median_metrics(ms);
  }
  return report;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

LevelMetrics median_level(const std::vector<const LevelMetrics*>& runs) {
  LevelMetrics out = *runs.front();
  auto pick = [&](auto getter) {
    std::vector<double> v;
    for (const auto* r : runs) v.push_back(getter(*r));
    return median(std::move(v));
  };
  out.micro_precision = pick([](const LevelMetrics& m) { return m.micro_precision; });
  out.micro_recall = pick([](const LevelMetrics& m) { return m.micro_recall; });
  out.micro_f1 = pick([](const LevelMetrics& m) { return m.micro_f1; });
  for (std::size_t c = 0; c < out.per_label.size(); ++c) {
    out.per_label[c].precision = pick([c](const LevelMetrics& m) { return m.per_label[c].precision; });
    out.per_label[c].recall = pick([c](const LevelMetrics& m) { return m.per_label[c].recall; });
    out.per_label[c].f1 = pick([c](const LevelMetrics& m) { return m.per_label[c].f1; });
  }
  return out;
}

const Roster kMultiRoster{"fine_a+fine_b|coarse_a+coarse_b", {"fine_a", "fine_b"}, {"coarse_a", "coarse_b"}};

}  // namespace

const teachers::Teacher& AblationSetup::teacher(const std::string& name) const {
  for (const auto& t : pool) {
    if (t.config().name == name) return t;
  }
  throw ConfigError("teacher '" + name + "' is not in the ablation pool");
}

TeacherSet AblationSetup::teacher_set(const std::vector<std::string>& fine,
                                      const std::vector<std::string>& coarse) const {
  TeacherSet set;
  for (const auto& n : fine) {
    const auto& t = teacher(n);
    if (t.grain() != teachers::Grain::kFine) throw ConfigError("teacher '" + n + "' is not fine-grained");
    set.fine.push_back(t);
  }
  for (const auto& n : coarse) {
    const auto& t = teacher(n);
    if (t.grain() != teachers::Grain::kCoarse) throw ConfigError("teacher '" + n + "' is not coarse-grained");
    set.coarse.push_back(t);
  }
  if (set.fine.empty() || set.coarse.empty()) throw ConfigError("a roster needs fine and coarse teachers");
  return set;
}

std::vector<LossCombo> default_loss_combos() {
  const char* names[] = {"sim",           "distil",        "triplet",         "align",
                         "sim+distil",    "sim+triplet",   "sim+align",       "distil+triplet",
                         "distil+align",  "sim+distil+triplet", "sim+distil+align", "sim+distil+triplet+align"};
  std::vector<LossCombo> out;
  for (const char* n : names) out.push_back(parse_loss_combo(n));
  return out;
}

LossCombo parse_loss_combo(const std::string& name) {
  LossCombo c{name, {}};
  std::size_t start = 0;
  while (start <= name.size()) {
    const std::size_t end = std::min(name.find('+', start), name.size());
    c.families.push_back(name.substr(start, end - start));
    start = end + 1;
  }
  losses::LossWeights::with(c.families);
  std::set<std::string> unique(c.families.begin(), c.families.end());
  if (unique.size() != c.families.size()) throw ValidationError("loss combination '" + name + "' repeats a family");
  return c;
}

std::vector<Roster> default_rosters() {
  std::vector<Roster> out;
  for (const char* f : {"fine_a", "fine_b"}) {
    for (const char* c : {"coarse_a", "coarse_b", "transformer"}) {
      out.push_back({std::string(f) + "|" + c, {f}, {c}});
    }
  }
  out.push_back({"fine_a|coarse_a+coarse_b", {"fine_a"}, {"coarse_a", "coarse_b"}});
  out.push_back({"fine_a+fine_b|coarse_b", {"fine_a", "fine_b"}, {"coarse_b"}});
  out.push_back(kMultiRoster);
  return out;
}

std::vector<ArchitectureRow> default_architectures() {
  const Roster single{"fine_a|coarse_b", {"fine_a"}, {"coarse_b"}};
  return {{"JG-E", student::Variant::kEncoderOnly, single},
          {"JG-D", student::Variant::kDecoderOnly, single},
          {"JG-E&D", student::Variant::kEncoderDecoder, single},
          {"MT-JG-E&D", student::Variant::kEncoderDecoder, kMultiRoster}};
}

Metrics median_metrics(const std::vector<Metrics>& runs) {
  if (runs.empty()) throw ValidationError("median of zero runs");
  std::vector<const LevelMetrics*> tok, ent;
  for (const auto& m : runs) {
    if (m.token.per_label.size() != runs[0].token.per_label.size() ||
        m.entity.per_label.size() != runs[0].entity.per_label.size()) {
      throw ShapeError("runs disagree on the label count");
    }
    tok.push_back(&m.token);
    ent.push_back(&m.entity);
  }
  return Metrics{median_level(tok), median_level(ent)};
}

AblationReport ablate_losses(const AblationSetup& setup, const std::vector<LossCombo>& combos) {
  check_setup(setup);
  std::vector<std::string> names;
  for (const auto& c : combos) names.push_back(c.name);
  check_unique(names);
  std::vector<Job> jobs;
  for (const auto& c : combos) {
    losses::LossWeights w = losses::LossWeights::with(c.families);
    w.task_fine = setup.weights.task_fine;
    w.task_coarse = setup.weights.task_coarse;
    auto keep_weight = [](losses::Term& t, const losses::Term& base) { t.weight = base.weight; };
    keep_weight(w.similarity, setup.weights.similarity);
    keep_weight(w.distilling, setup.weights.distilling);
    keep_weight(w.triplet, setup.weights.triplet);
    keep_weight(w.alignment, setup.weights.alignment);
    w.margin = setup.weights.margin;
    w.raw_sum = setup.weights.raw_sum;
    for (auto seed : setup.seeds) jobs.push_back({c.name, seed, setup.student, w, kMultiRoster});
  }
  return assemble(setup, "losses", jobs);
}

AblationReport ablate_teachers(const AblationSetup& setup, const std::vector<Roster>& rosters) {
  check_setup(setup);
  std::vector<std::string> names;
  for (const auto& r : rosters) names.push_back(r.name);
  check_unique(names);
  std::vector<Job> jobs;
  for (const auto& r : rosters) {
    for (auto seed : setup.seeds) jobs.push_back({r.name, seed, setup.student, setup.weights, r});
  }
  return assemble(setup, "teachers", jobs);
}

AblationReport ablate_architecture(const AblationSetup& setup, const std::vector<ArchitectureRow>& rows) {
  check_setup(setup);
  std::vector<std::string> names;
  for (const auto& r : rows) names.push_back(r.name);
  check_unique(names);
  std::vector<Job> jobs;
  for (const auto& r : rows) {
    student::StudentConfig cfg = setup.student;
    cfg.variant = r.variant;
    for (auto seed : setup.seeds) jobs.push_back({r.name, seed, cfg, setup.weights, r.roster});
  }
  return assemble(setup, "architecture", jobs);
}

}  // namespace jgkd::harness
