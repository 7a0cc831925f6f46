// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <iostream>

#include "jgkd/cli/commands.hpp"

namespace {

using jgkd::cli::RunConfig;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "jgkd_out";
  std::optional<std::size_t> threads;
  std::optional<std::string> variant;
  std::optional<std::string> losses;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "key=value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "overrides the 'seed' key");
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
  cmd->add_option("--threads", c.threads, "overrides the 'threads' key");
  cmd->add_option("--variant", c.variant, "overrides 'student.variant': encoder_only, decoder_only, encoder_and_decoder");
  cmd->add_option("--losses", c.losses, "overrides 'loss.families': comma list of sim,distil,triplet,align or none");
  cmd->add_option("--set", c.sets, "key=value override, repeatable");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig() : RunConfig::load(c.config);
  for (const auto& s : c.sets) cfg.set_assignment(s);
  if (c.seed) cfg.set("seed", std::to_string(*c.seed));
  if (c.threads) cfg.set("threads", std::to_string(*c.threads));
  if (c.variant) cfg.set("student.variant", *c.variant);
  if (c.losses) cfg.set("loss.families", *c.losses == "none" ? "" : *c.losses);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"jgkd: joint-grained multi-teacher distillation for form understanding"};
  app.require_subcommand(1);
  const std::string footer =
      "\nPrecedence: defaults < --config file < --set < --seed/--threads/--variant/--losses.\n"
      "Exit codes: 0 success, 1 validation or config error, 2 numeric failure, 3 I/O error.\n"
      "Flags on every subcommand: --config, --seed, --out, --threads, --variant, --losses, --set.\n"
      "Other flags: --corpus (train-teachers, train-student, eval, ablate), --teachers (train-student, eval,\n"
      "ablate), --student and --split (eval), --inject-defect (selfcheck).\n\n" +
      jgkd::cli::describe_keys();
  app.footer(footer);

  Common common;
  std::string corpus_dir, teacher_dir, student_path, split = "test", which;
  std::optional<std::string> defect;

  auto* gen = app.add_subcommand("gen-data", "generate the synthetic corpus splits");
  auto* tt = app.add_subcommand("train-teachers", "train the default fine and coarse teachers");
  auto* ts = app.add_subcommand("train-student", "train the joint-grained student");
  auto* ev = app.add_subcommand("eval", "score a saved student on one split");
  auto* ab = app.add_subcommand("ablate", "run a loss, teacher or architecture ablation grid");
  auto* sc = app.add_subcommand("selfcheck", "finite-difference gradient checks and loss oracles");
  for (auto* cmd : {gen, tt, ts, ev, ab, sc}) {
    add_common(cmd, common);
    cmd->footer(footer);
  }
  for (auto* cmd : {tt, ts, ev}) cmd->add_option("--corpus", corpus_dir, "corpus directory from gen-data")->required();
  for (auto* cmd : {ts, ev}) cmd->add_option("--teachers", teacher_dir, "checkpoint directory from train-teachers")->required();
  ev->add_option("--student", student_path, "student checkpoint")->required();
  ev->add_option("--split", split, "train, val or test")->capture_default_str();
  ab->add_option("which", which, "losses, teachers or architecture")->required();
  ab->add_option("--corpus", corpus_dir, "corpus directory (default: generate from config)");
  ab->add_option("--teachers", teacher_dir, "teacher checkpoints (default: train in-process)");
  sc->add_option("--inject-defect", defect, "double the backward rule of this primitive");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    const RunConfig cfg = resolve(common);
    if (*gen) {
      const auto s = jgkd::cli::cmd_gen_data(cfg, common.out);
      std::cerr << "wrote " << s.train.size() << "/" << s.val.size() << "/" << s.test.size()
                << " train/val/test pages to " << common.out << "\n";
    } else if (*tt) {
      jgkd::cli::cmd_train_teachers(cfg, corpus_dir, common.out, std::cerr);
    } else if (*ts) {
      jgkd::cli::cmd_train_student(cfg, corpus_dir, teacher_dir, common.out, std::cerr);
    } else if (*ev) {
      const auto m = jgkd::cli::cmd_eval(cfg, corpus_dir, teacher_dir, student_path, split, common.out);
      std::cout << jgkd::harness::metrics_json(m, cfg.schema());
    } else if (*ab) {
      jgkd::cli::cmd_ablate(cfg, which, corpus_dir, teacher_dir, common.out, std::cerr);
    } else if (*sc) {
      return jgkd::cli::cmd_selfcheck(defect, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return jgkd::cli::exit_code(e);
  }
  return 0;
}
