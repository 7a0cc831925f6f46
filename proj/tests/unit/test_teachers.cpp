// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "jgkd/corpus/generator.hpp"
#include "jgkd/errors.hpp"
#include "jgkd/io/checkpoint.hpp"
#include "jgkd/teachers/teacher.hpp"

using namespace jgkd;
using namespace jgkd::teachers;
namespace fs = std::filesystem;

namespace {

corpus::Corpus separable(std::size_t pages, std::uint64_t seed = 11) {
  corpus::GenSpec spec;
  spec.n_pages = pages;
  spec.signal = 1.0;
  spec.noise_rate = 0.0;
  return corpus::generate_corpus(spec, seed);
}

TeacherConfig roster_entry(const std::string& name) {
  for (auto& c : default_roster(corpus::SchemaId::kFunsd, 3)) {
    if (c.name == name) return c;
  }
  FAIL("no such roster entry");
  return {};
}

fs::path temp_file(const std::string& name) {
  fs::create_directories(fs::temp_directory_path() / "jgkd_teachers");
  return fs::temp_directory_path() / "jgkd_teachers" / name;
}

bool same_output(const TeacherOutput& a, const TeacherOutput& b) { return a.hidden == b.hidden && a.logits == b.logits; }

}  // namespace

TEST_CASE("fine teacher reaches near-perfect train F1 on a separable corpus") {
  const auto c = separable(40);
  auto cfg = roster_entry("fine_a");
  cfg.epochs = 20;
  auto trained = train_fine_teacher(c, cfg);
  CHECK(trained.teacher.frozen());
  REQUIRE(trained.history.size() == 20);
  CHECK(trained.history.back().train_f1 >= 0.99);
  CHECK(teacher_f1(trained.teacher, c) == doctest::Approx(trained.history.back().train_f1));

  // argmax of the logits on a train page recovers the labels
  const auto& page = c[0];
  const auto out = trained.teacher.infer(page);
  const auto y = page.token_labels();
  for (std::size_t i = 0; i < y.size(); ++i) {
    auto row = out.logits.row(i);
    CHECK(static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()) == y[i]);
  }
}

TEST_CASE("coarse teacher reaches near-perfect train F1, also without visual features") {
  auto c = separable(40);
  auto cfg = roster_entry("coarse_a");
  cfg.epochs = 20;
  CHECK(train_coarse_teacher(c, cfg).history.back().train_f1 >= 0.99);

  for (auto& page : c)
    for (auto& e : page.entities) std::fill(e.visual_feat.begin(), e.visual_feat.end(), 0.0);
  CHECK(teacher_f1(train_coarse_teacher(c, cfg).teacher, c) >= 0.9);
}

TEST_CASE("zero epochs returns the frozen initialization") {
  const auto c = separable(3);
  auto cfg = roster_entry("fine_b");
  cfg.epochs = 0;
  auto trained = train_teacher(c, cfg);
  CHECK(trained.history.empty());
  CHECK(trained.teacher.frozen());
  CHECK(trained.teacher.checksum() == Teacher(cfg).checksum());
  CHECK_THROWS_AS(trained.teacher.params(), ContractError);

  auto other = cfg;
  other.seed += 1;
  CHECK(Teacher(other).checksum() != Teacher(cfg).checksum());
  CHECK_THROWS_AS(train_teacher({}, cfg), ValidationError);
}

TEST_CASE("teacher inference shapes, determinism and schema check") {
  corpus::GenSpec spec;
  spec.n_pages = 4;
  spec.tokens_min = spec.tokens_max = 1;
  spec.entities_min = spec.entities_max = 5;
  const auto c = corpus::generate_corpus(spec, 2);
  Teacher fine(roster_entry("fine_a"));
  Teacher coarse(roster_entry("coarse_b"));
  const auto fo = fine.infer(c[0]);
  CHECK(fo.hidden.shape() == ad::Shape{5, 48});
  CHECK(fo.logits.shape() == ad::Shape{5, 4});
  const auto co = coarse.infer(c[0]);
  CHECK(co.hidden.shape() == ad::Shape{5, 24});
  CHECK(co.logits.shape() == ad::Shape{5, 4});
  CHECK(same_output(fine.infer(c[0]), fo));

  spec.schema = corpus::SchemaId::kFormNlu;
  const auto other = corpus::generate_corpus(spec, 2);
  CHECK_THROWS_AS(fine.infer(other[0]), SchemaError);
}

TEST_CASE("teacher checkpoints round trip bit-exactly") {
  const auto c = separable(5);
  for (const auto& cfg : default_roster(corpus::SchemaId::kFunsd, 9)) {
    auto small = cfg;
    small.epochs = 1;
    const auto trained = train_teacher(c, small);
    const auto path = temp_file(cfg.name + ".ckpt");
    save_teacher(trained.teacher, path);
    const Teacher back = load_teacher(path, cfg.grain);
    CHECK(back.frozen());
    CHECK(back.config().name == cfg.name);
    CHECK(back.checksum() == trained.teacher.checksum());
    for (const auto& page : c) CHECK(same_output(back.infer(page), trained.teacher.infer(page)));
  }
}

TEST_CASE("damaged and mismatched teacher checkpoints are rejected") {
  Teacher fine(roster_entry("fine_a"));
  const auto path = temp_file("fine.ckpt");
  save_teacher(fine, path);
  CHECK_THROWS_AS(load_teacher(path, Grain::kCoarse), FormatError);
  try {
    load_teacher(path, Grain::kCoarse);
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("fine teacher") != std::string::npos);
  }

  const auto size = fs::file_size(path);
  const auto cut = temp_file("cut.ckpt");
  fs::copy_file(path, cut, fs::copy_options::overwrite_existing);
  fs::resize_file(cut, size - 13);
  CHECK_THROWS_AS(load_teacher(cut, Grain::kFine), FormatError);

  const auto bad = temp_file("bad.ckpt");
  std::ofstream(bad, std::ios::binary) << "JGKX\x01\x00";
  CHECK_THROWS_AS(load_teacher(bad, Grain::kFine), FormatError);
}

TEST_CASE("checkpoint container encodes the documented byte layout") {
  const auto path = temp_file("layout.bin");
  io::write_arrays(path, {{"ab", ad::Tensor::matrix({{1.5, -2.0}})}});
  std::ifstream in(path, std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  // magic 4 + version 2 + count 8 + (len 8 + name 2 + rank 8 + dims 16 + data 16)
  REQUIRE(bytes.size() == 64);
  CHECK(bytes.substr(0, 4) == "JGKD");
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
  CHECK(bytes[6] == 1);
  CHECK(bytes[14] == 2);
  CHECK(bytes.substr(22, 2) == "ab");
  CHECK(bytes[24] == 2);
  CHECK(bytes[32] == 1);
  CHECK(bytes[40] == 2);
  // 1.5 = 0x3FF8000000000000, little-endian
  CHECK(static_cast<unsigned char>(bytes[55]) == 0x3f);
  CHECK(static_cast<unsigned char>(bytes[54]) == 0xf8);
  const auto back = io::read_arrays(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0].first == "ab");
  CHECK(back[0].second == ad::Tensor::matrix({{1.5, -2.0}}));
}
