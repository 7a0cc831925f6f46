// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "jgkd/corpus/generator.hpp"
#include "jgkd/errors.hpp"
#include "jgkd/harness/ablation.hpp"
#include "jgkd/harness/report.hpp"

using namespace jgkd;
using namespace jgkd::harness;
namespace fs = std::filesystem;

namespace {

struct Fixture {
  corpus::CorpusSplit split;
  std::vector<teachers::Teacher> pool;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture x;
    corpus::GenSpec g;
    g.n_pages = 30;
    x.split = corpus::split_corpus(corpus::generate_corpus(g, 5), {0.6, 0.2, 0.2}, 5);
    auto roster = teachers::default_roster(g.schema, 5);
    roster.push_back(teachers::random_coarse_config(g.schema, 5));
    for (auto& c : roster) {
      c.dim = 8;
      c.heads = 2;
      if (c.epochs > 0) c.epochs = 4;
      x.pool.push_back(teachers::train_teacher(x.split.train, c).teacher);
    }
    return x;
  }();
  return f;
}

student::StudentConfig small_student() {
  student::StudentConfig c;
  c.dim = 12;
  c.heads = 2;
  c.encoder_layers = 1;
  c.decoder_layers = 1;
  return c;
}

AblationSetup small_setup() {
  const auto& f = fixture();
  AblationSetup s;
  s.train = f.split.train;
  s.val = f.split.val;
  s.test = f.split.test;
  s.pool = f.pool;
  s.student = small_student();
  s.spec.adam.lr = 3e-3;
  s.spec.max_epochs = 2;
  return s;
}

TeacherSet full_set() { return small_setup().teacher_set({"fine_a", "fine_b"}, {"coarse_a", "coarse_b"}); }

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "jgkd_test_harness";
  fs::create_directories(dir);
  return dir / name;
}

// Per-label P/R/F1 straight from a confusion matrix.
LevelMetrics brute_force(const std::vector<std::size_t>& gold, const std::vector<std::size_t>& pred, std::size_t C,
                         std::size_t other) {
  std::vector<std::vector<double>> cm(C, std::vector<double>(C, 0.0));
  for (std::size_t i = 0; i < gold.size(); ++i) cm[gold[i]][pred[i]] += 1;
  auto ratio = [](double a, double b) { return b == 0 ? 0.0 : a / b; };
  auto f1 = [](double p, double r) { return p + r == 0 ? 0.0 : 2 * p * r / (p + r); };
  LevelMetrics m;
  double tp = 0, pp = 0, gp = 0;
  for (std::size_t c = 0; c < C; ++c) {
    double col = 0, row = 0;
    for (std::size_t j = 0; j < C; ++j) {
      col += cm[j][c];
      row += cm[c][j];
    }
    LabelScore s;
    s.precision = ratio(cm[c][c], col);
    s.recall = ratio(cm[c][c], row);
    s.f1 = f1(s.precision, s.recall);
    s.support = static_cast<std::size_t>(row);
    m.per_label.push_back(s);
    if (c != other) {
      tp += cm[c][c];
      pp += col;
      gp += row;
    }
  }
  m.micro_precision = ratio(tp, pp);
  m.micro_recall = ratio(tp, gp);
  m.micro_f1 = f1(m.micro_precision, m.micro_recall);
  return m;
}

void check_close(const LevelMetrics& a, const LevelMetrics& b) {
  REQUIRE(a.per_label.size() == b.per_label.size());
  CHECK(a.micro_precision == doctest::Approx(b.micro_precision).epsilon(1e-12));
  CHECK(a.micro_recall == doctest::Approx(b.micro_recall).epsilon(1e-12));
  CHECK(a.micro_f1 == doctest::Approx(b.micro_f1).epsilon(1e-12));
  for (std::size_t c = 0; c < a.per_label.size(); ++c) {
    CHECK(a.per_label[c].precision == doctest::Approx(b.per_label[c].precision).epsilon(1e-12));
    CHECK(a.per_label[c].recall == doctest::Approx(b.per_label[c].recall).epsilon(1e-12));
    CHECK(a.per_label[c].f1 == doctest::Approx(b.per_label[c].f1).epsilon(1e-12));
    CHECK(a.per_label[c].support == b.per_label[c].support);
  }
}

std::size_t argmax(std::span<const double> row) {
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

}  // namespace

TEST_CASE("scoring examples") {
  SUBCASE("perfect predictions") {
    const std::vector<std::size_t> g{0, 1, 2, 1, 0};
    const LevelMetrics m = score_labels(g, g, 3, std::nullopt);
    CHECK(m.micro_f1 == 1.0);
    for (const auto& s : m.per_label) CHECK(s.f1 == 1.0);
  }
  SUBCASE("one-class predictions on a balanced two-class split") {
    const std::vector<std::size_t> g{0, 0, 1, 1}, p{0, 0, 0, 0};
    const LevelMetrics m = score_labels(g, p, 2, std::nullopt);
    CHECK(m.per_label[0].precision == 0.5);
    CHECK(m.per_label[0].recall == 1.0);
    CHECK(m.per_label[0].f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(m.per_label[1].f1 == 0.0);
  }
  SUBCASE("precision 2/3 and recall 1/2") {
    // Label 0: gold 4, predicted 3 of which 2 correct.
    const std::vector<std::size_t> g{0, 0, 0, 0, 1, 1}, p{0, 0, 1, 1, 0, 1};
    const LevelMetrics m = score_labels(g, p, 2, 1);
    CHECK(m.per_label[0].precision == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(m.per_label[0].recall == 0.5);
    CHECK(m.per_label[0].f1 == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
    CHECK(m.micro_f1 == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
  }
  SUBCASE("random fixtures match a brute-force confusion matrix") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t C = uniform_index(rng, 2, 5), n = uniform_index(rng, 1, 40);
      std::vector<std::size_t> g(n), p(n);
      for (std::size_t i = 0; i < n; ++i) {
        g[i] = uniform_index(rng, 0, C - 1);
        p[i] = uniform_index(rng, 0, C - 1);
      }
      check_close(score_labels(g, p, C, C - 1), brute_force(g, p, C, C - 1));
    }
  }
}

TEST_CASE("evaluate agrees with a brute-force recomputation and rejects empty splits") {
  const auto& f = fixture();
  const TeacherSet set = full_set();
  const auto cfg = configure_student(small_student(), set, corpus::SchemaId::kFunsd);
  const student::Student s(cfg);
  const Metrics m = evaluate(s, set, f.split.test);

  std::vector<std::size_t> tg, tp, eg, ep;
  for (const auto& page : f.split.test) {
    const auto tr = s.trace(set.outputs(page));
    for (std::size_t r = 0; r < page.num_tokens(); ++r) tp.push_back(argmax(tr.p_t.row(r)));
    for (std::size_t r = 0; r < page.num_entities(); ++r) ep.push_back(argmax(tr.p_e.row(r)));
    for (auto l : page.token_labels()) tg.push_back(l);
    for (auto l : page.entity_labels()) eg.push_back(l);
  }
  check_close(m.token, brute_force(tg, tp, 4, 3));
  check_close(m.entity, brute_force(eg, ep, 4, 3));
  CHECK(evaluate(s, set, f.split.test) == m);
  CHECK_THROWS_AS(evaluate(s, set, corpus::Corpus{}), ValidationError);
}

TEST_CASE("zero epochs returns the initialization with an empty history") {
  const auto& f = fixture();
  const TeacherSet set = full_set();
  const auto cfg = configure_student(small_student(), set, corpus::SchemaId::kFunsd);
  TrainSpec spec;
  spec.max_epochs = 0;
  const TrainResult r = train_student(f.split.train, f.split.val, set, cfg, losses::LossWeights{}, spec);
  CHECK(r.history.epochs.empty());
  CHECK(r.history.steps.empty());
  CHECK(r.best_epoch == 0);
  CHECK(r.student.params().checksum() == student::Student(cfg).params().checksum());
}

TEST_CASE("with only the token task loss the entity head receives no gradient") {
  const auto& f = fixture();
  const TeacherSet set = full_set();
  const auto cfg = configure_student(small_student(), set, corpus::SchemaId::kFunsd);
  student::Student s(cfg);
  losses::LossWeights w = losses::LossWeights::task_only();
  w.task_coarse.enabled = false;
  Rng rng(1);
  for (const auto& page : f.split.train) {
    s.params().zero_grad();
    ad::Tape tape;
    nn::Binder b(tape, s.params());
    const auto obj = page_objective(b, s, set.outputs(page), page, w, rng);
    tape.backward(obj.loss.total);
    bool token_head_moved = false;
    for (const auto& p : s.params()) {
      if (p.name.rfind("head.entity", 0) == 0) {
        for (double g : p.grad) CHECK(g == 0.0);
      }
      if (p.name.rfind("head.token", 0) == 0) {
        for (double g : p.grad) token_head_moved = token_head_moved || g != 0.0;
      }
    }
    CHECK(token_head_moved);
  }
}

TEST_CASE("training is deterministic, records every step and keeps the best epoch") {
  const auto& f = fixture();
  const TeacherSet set = full_set();
  const auto cfg = configure_student(small_student(), set, corpus::SchemaId::kFunsd);
  TrainSpec spec;
  spec.adam.lr = 3e-3;
  spec.max_epochs = 4;
  spec.patience = 2;
  const losses::LossWeights w;
  const std::uint64_t before = set.checksum();
  const TrainResult a = train_student(f.split.train, f.split.val, set, cfg, w, spec);
  const TrainResult b = train_student(f.split.train, f.split.val, set, cfg, w, spec);
  CHECK(set.checksum() == before);

  CHECK(a.student.params().checksum() == b.student.params().checksum());
  REQUIRE(a.history.epochs.size() == b.history.epochs.size());
  for (std::size_t i = 0; i < a.history.epochs.size(); ++i) {
    CHECK(a.history.epochs[i].mean.total == b.history.epochs[i].mean.total);
    CHECK(a.history.epochs[i].val_token_f1 == b.history.epochs[i].val_token_f1);
  }
  CHECK(a.history.steps.size() == a.history.epochs.size() * f.split.train.size());
  for (const auto& st : a.history.steps) {
    CHECK(st.breakdown.parts().size() == 9);
    CHECK(std::isfinite(st.breakdown.total));
  }

  double best = a.history.initial_val_token_f1;
  for (const auto& e : a.history.epochs) best = std::max(best, e.val_token_f1);
  CHECK(a.best_val_f1 == best);
  CHECK(evaluate(a.student, set, f.split.val).token.micro_f1 == best);

  const fs::path hp = temp_path("history.jsonl");
  write_history(a.history, hp);
  const std::string text = slurp(hp);
  CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) == a.history.epochs.size());
}

TEST_CASE("all losses with two teachers per grain fit a separable corpus") {
  corpus::GenSpec g;
  g.n_pages = 16;
  g.signal = 1.0;
  const auto pages = corpus::generate_corpus(g, 21);
  auto roster = teachers::default_roster(g.schema, 21);
  TeacherSet set;
  for (auto& c : roster) {
    auto t = teachers::train_teacher(pages, c).teacher;
    (t.grain() == teachers::Grain::kFine ? set.fine : set.coarse).push_back(std::move(t));
  }
  const auto cfg = configure_student(small_student(), set, g.schema);
  TrainSpec spec;
  spec.adam.lr = 5e-3;
  spec.max_epochs = 50;
  spec.patience = 50;
  const TrainResult r = train_student(pages, pages, set, cfg, losses::LossWeights{}, spec);
  CHECK(evaluate(r.student, set, pages).token.micro_f1 >= 0.99);
}

TEST_CASE("configuration errors surface before training") {
  const auto& f = fixture();
  const AblationSetup s = small_setup();
  const TeacherSet one = s.teacher_set({"fine_a"}, {"coarse_a", "coarse_b"});
  const auto cfg = configure_student(small_student(), one, corpus::SchemaId::kFunsd);
  CHECK_THROWS_AS(train_student(f.split.train, f.split.val, one, cfg, losses::LossWeights{}, TrainSpec{}), ConfigError);
  TrainSpec bad;
  bad.adam.lr = 0;
  CHECK_THROWS_AS(
      train_student(f.split.train, f.split.val, one, cfg, losses::LossWeights::task_only(), bad), ConfigError);
  CHECK_THROWS_AS(train_student({}, f.split.val, one, cfg, losses::LossWeights::task_only(), TrainSpec{}),
                  ValidationError);
  CHECK_THROWS_AS(s.teacher_set({"nope"}, {"coarse_a"}), ConfigError);
  CHECK_THROWS_AS(s.teacher_set({"coarse_a"}, {"coarse_b"}), ConfigError);
}

TEST_CASE("default grids follow the table row order") {
  const auto combos = default_loss_combos();
  REQUIRE(combos.size() == 12);
  CHECK(combos.front().name == "sim");
  CHECK(combos[4].families == std::vector<std::string>{"sim", "distil"});
  CHECK(combos.back().families == std::vector<std::string>{"sim", "distil", "triplet", "align"});
  const auto rosters = default_rosters();
  REQUIRE(rosters.size() == 9);
  CHECK(rosters[2].coarse == std::vector<std::string>{"transformer"});
  CHECK(rosters.back().fine.size() == 2);
  CHECK(rosters.back().coarse.size() == 2);
  const auto arch = default_architectures();
  REQUIRE(arch.size() == 4);
  CHECK(arch[0].name == "JG-E");
  CHECK(arch[3].name == "MT-JG-E&D");
  CHECK_THROWS_AS(parse_loss_combo("sim+kl"), ValidationError);
  CHECK_THROWS_AS(parse_loss_combo("sim+sim"), ValidationError);
  CHECK_THROWS_AS(parse_loss_combo(""), ValidationError);
}

TEST_CASE("median of metrics") {
  Metrics a, b, c;
  for (Metrics* m : {&a, &b, &c}) {
    m->token.per_label.resize(2);
    m->entity.per_label.resize(2);
  }
  a.token.micro_f1 = 0.2;
  b.token.micro_f1 = 0.9;
  c.token.micro_f1 = 0.5;
  a.entity.per_label[1].recall = 1.0;
  CHECK(median_metrics({a, b, c}).token.micro_f1 == 0.5);
  CHECK(median_metrics({a, b}).token.micro_f1 == doctest::Approx(0.55).epsilon(1e-15));
  CHECK(median_metrics({a, b}).entity.per_label[1].recall == 0.5);
  CHECK_THROWS_AS(median_metrics({}), ValidationError);
}

TEST_CASE("loss ablation keeps raw runs and reports their median") {
  AblationSetup s = small_setup();
  s.seeds = {1, 2};
  const AblationReport r = ablate_losses(s, {parse_loss_combo("sim+align")});
  REQUIRE(r.rows.size() == 1);
  const auto& row = r.rows[0];
  REQUIRE(row.runs.size() == 2);
  CHECK(row.runs[0].seed == 1);
  CHECK(row.runs[1].seed == 2);
  const double expect = 0.5 * (row.runs[0].test.token.micro_f1 + row.runs[1].test.token.micro_f1);
  CHECK(row.median.token.micro_f1 == expect);
  CHECK(row.median == median_metrics({row.runs[0].test, row.runs[1].test}));
  for (const auto& run : row.runs) CHECK(run.teacher_checksum_before == run.teacher_checksum_after);

  s.seeds = {1};
  CHECK(ablate_losses(s, {parse_loss_combo("distil")}).rows.size() == 1);
  CHECK_THROWS_AS(ablate_losses(s, {parse_loss_combo("sim"), parse_loss_combo("sim")}), ValidationError);
}

TEST_CASE("teacher and architecture ablations: structure, freezing and thread independence") {
  AblationSetup s = small_setup();
  s.spec.max_epochs = 1;
  const std::vector<Roster> rosters{default_rosters()[2], default_rosters()[7]};
  const AblationReport serial = ablate_teachers(s, rosters);
  REQUIRE(serial.rows.size() == 2);
  CHECK(serial.rows[0].config == "fine_a|transformer");
  for (const auto& row : serial.rows) {
    for (const auto& run : row.runs) CHECK(run.teacher_checksum_before == run.teacher_checksum_after);
  }
  s.threads = 2;
  CHECK(ablate_teachers(s, rosters) == serial);

  s.threads = 1;
  const AblationReport arch = ablate_architecture(s, default_architectures());
  REQUIRE(arch.rows.size() == 4);
  std::set<double> distinct;
  for (const auto& row : arch.rows) {
    CHECK(row.runs.size() == 1);
    distinct.insert(row.median.token.micro_f1 + 1e3 * row.median.entity.micro_f1);
  }
  CHECK(distinct.size() > 1);
}

TEST_CASE("report emission is deterministic and parses back") {
  AblationSetup s = small_setup();
  s.spec.max_epochs = 1;
  s.seeds = {3, 4};
  const AblationReport r = ablate_losses(s, {parse_loss_combo("sim"), parse_loss_combo("align")});

  const fs::path a = temp_path("a.csv"), b = temp_path("b.csv");
  emit_report(r, a, ReportFormat::kCsv);
  emit_report(r, b, ReportFormat::kCsv);
  CHECK(slurp(a) == slurp(b));
  CHECK(read_report_csv(a) == r);

  const std::string csv = slurp(a);
  const std::string header = csv.substr(0, csv.find('\n'));
  for (const auto& col : report_columns(corpus::SchemaId::kFunsd)) CHECK(header.find(col) != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 + 4);

  const fs::path j = temp_path("a.jsonl");
  emit_report(r, j, ReportFormat::kJsonl);
  const std::string jsonl = slurp(j);
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 2);
  CHECK(render_report(r, ReportFormat::kJsonl) == jsonl);

  const AblationReport empty{"losses", corpus::SchemaId::kFunsd, {}};
  emit_report(empty, a, ReportFormat::kCsv);
  CHECK(slurp(a) == header + "\n");
  CHECK(read_report_csv(a).rows.empty());

  CHECK_THROWS_AS(parse_report_csv("kind,config\n"), FormatError);
  CHECK_THROWS_AS(emit_report(r, fs::path("/nonexistent/dir/r.csv"), ReportFormat::kCsv), IoError);
  CHECK_THROWS_AS(parse_report_format("xml"), ValidationError);
}
