// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdlib>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "jgkd/corpus/generator.hpp"
#include "jgkd/corpus/io.hpp"
#include "jgkd/errors.hpp"

using namespace jgkd;
using namespace jgkd::corpus;
namespace fs = std::filesystem;

namespace {

std::string serialize(const Corpus& c) {
  std::string s;
  for (const auto& p : c) s += page_to_json(p) + "\n";
  return s;
}

fs::path temp_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("jgkd_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("generate_corpus is deterministic and handles zero pages") {
  GenSpec spec;
  spec.n_pages = 12;
  CHECK(serialize(generate_corpus(spec, 7)) == serialize(generate_corpus(spec, 7)));
  CHECK(serialize(generate_corpus(spec, 7)) != serialize(generate_corpus(spec, 8)));

  spec.n_pages = 0;
  CHECK(generate_corpus(spec, 7).empty());
}

TEST_CASE("generated counts fall inside the spec ranges") {
  GenSpec spec;
  spec.n_pages = 10;
  spec.entities_min = 3;
  spec.entities_max = 5;
  spec.tokens_min = 1;
  spec.tokens_max = 4;
  const Corpus c = generate_corpus(spec, 99);
  std::size_t entities = 0, tokens = 0;
  for (const auto& page : c) {
    CHECK(page.entities.size() >= 3);
    CHECK(page.entities.size() <= 5);
    entities += page.entities.size();
    tokens += page.tokens.size();
    for (const auto& e : page.entities) {
      CHECK(e.token_ids.size() >= 1);
      CHECK(e.token_ids.size() <= 4);
    }
  }
  CHECK(entities >= 30);
  CHECK(entities <= 50);
  CHECK(tokens >= 30);
  CHECK(tokens <= 200);
  const auto counts = count_labels(c, spec.schema);
  CHECK(counts.total_entities == entities);
  CHECK(counts.total_tokens == tokens);
}

TEST_CASE("page invariants hold for every generated page in both schemas") {
  for (auto sid : {SchemaId::kFunsd, SchemaId::kFormNlu}) {
    for (double signal : {0.0, 0.5, 1.0}) {
      GenSpec spec;
      spec.schema = sid;
      spec.n_pages = 25;
      spec.signal = signal;
      spec.noise_rate = 0.3;
      spec.entities_min = 1;
      spec.entities_max = 9;
      for (const auto& page : generate_corpus(spec, 5)) {
        CHECK_NOTHROW(validate_page(page));
        CHECK(page.num_tokens() >= page.num_entities());
        // reading order: entities by (y0, x0), tokens by x0 within an entity
        for (std::size_t e = 1; e < page.entities.size(); ++e) {
          CHECK(page.entities[e - 1].bbox.y0 <= page.entities[e].bbox.y0);
        }
        for (const auto& e : page.entities) {
          for (std::size_t j = 1; j < e.token_ids.size(); ++j) {
            CHECK(page.tokens[e.token_ids[j - 1]].bbox.x0 < page.tokens[e.token_ids[j]].bbox.x0);
          }
        }
      }
    }
  }
}

TEST_CASE("majority vote over text ids recovers every label on a separable corpus") {
  for (auto sid : {SchemaId::kFunsd, SchemaId::kFormNlu}) {
    GenSpec spec;
    spec.schema = sid;
    spec.n_pages = 30;
    spec.signal = 1.0;
    spec.noise_rate = 0.0;
    const std::size_t c = schema(sid).num_labels();
    for (const auto& page : generate_corpus(spec, 3)) {
      for (const auto& e : page.entities) {
        std::map<std::size_t, int> votes;
        for (std::size_t t : e.token_ids) ++votes[vocab_block_label(page.tokens[t].text_id, spec.vocab_size, c)];
        auto best = std::max_element(votes.begin(), votes.end(),
                                     [](auto& a, auto& b) { return a.second < b.second; });
        CHECK(best->first == e.label);
      }
    }
  }
}

TEST_CASE("invalid generator spec lists offending fields") {
  GenSpec spec;
  spec.signal = 1.5;
  spec.tokens_min = 0;
  try {
    generate_corpus(spec, 1);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("signal") != std::string::npos);
    CHECK(msg.find("tokens_min") != std::string::npos);
  }
}

TEST_CASE("native format round trip reproduces the corpus") {
  GenSpec spec;
  spec.n_pages = 15;
  spec.schema = SchemaId::kFormNlu;
  spec.signal = 0.6;
  const Corpus c = generate_corpus(spec, 21);
  const fs::path dir = temp_dir("roundtrip");
  write_corpus(dir / "c.jsonl", c);
  CHECK(read_corpus(dir / "c.jsonl") == c);
}

TEST_CASE("native reader rejects broken records with location") {
  const fs::path dir = temp_dir("badnative");
  {
    std::ofstream(dir / "bad.jsonl") << "{\"id\":1}\n";
  }
  try {
    read_corpus(dir / "bad.jsonl");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("bad.jsonl:1") != std::string::npos);
  }
}

TEST_CASE("load_funsd single-entity fixture") {
  std::vector<std::string> warnings;
  const Corpus c = load_funsd(fs::path(JGKD_FIXTURE_DIR) / "funsd_single", {}, &warnings);
  REQUIRE(c.size() == 1);
  CHECK(warnings.empty());
  const auto& page = c[0];
  CHECK(page.id == "0000971160");
  CHECK(page.entities.size() == 1);
  CHECK(page.tokens.size() == 3);
  for (const auto& t : page.tokens) CHECK(t.entity_id == 0);
  CHECK(page.entities[0].label == schema(SchemaId::kFunsd).label_index("question"));
  CHECK(page.entities[0].visual_feat == std::vector<double>(16, 0.0));
  CHECK(page.tokens[0].text_id == hash_word("compound", 200));
}

TEST_CASE("load_funsd multi-page fixture keeps file and word order") {
  std::vector<std::string> warnings;
  const Corpus c = load_funsd(fs::path(JGKD_FIXTURE_DIR) / "funsd_mixed", {}, &warnings);
  REQUIRE(c.size() == 2);
  CHECK(c[0].id == "a");
  CHECK(c[1].id == "b");
  CHECK(c[0].entities.size() == 4);
  // word-less "other" entity becomes one token, with a warning
  CHECK(c[0].tokens.size() == 2 + 1 + 3 + 1);
  CHECK(warnings.size() == 1);
  const auto counts = count_labels(c, SchemaId::kFunsd);
  CHECK(counts.entities == std::vector<std::size_t>{2, 2, 1, 1});
  CHECK(counts.tokens == std::vector<std::size_t>{2, 5, 2, 1});
  for (const auto& page : c) CHECK_NOTHROW(validate_page(page));
}

TEST_CASE("load_funsd error paths") {
  CHECK_THROWS_AS(load_funsd(fs::path(JGKD_FIXTURE_DIR) / "funsd_malformed"), ParseError);
  try {
    load_funsd(fs::path(JGKD_FIXTURE_DIR) / "funsd_badlabel");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("page.json") != std::string::npos);
  }
  const fs::path empty = temp_dir("emptyfunsd");
  std::vector<std::string> warnings;
  CHECK(load_funsd(empty, {}, &warnings).empty());
  CHECK(warnings.size() == 1);
}

TEST_CASE("FUNSD test split matches published label distribution" * doctest::skip(std::getenv("JGKD_FUNSD_TEST_DIR") == nullptr)) {
  const Corpus c = load_funsd(std::getenv("JGKD_FUNSD_TEST_DIR"));
  const auto counts = count_labels(c, SchemaId::kFunsd);
  CHECK(counts.total_entities == 2332);
  CHECK(counts.total_tokens == 8707);
  CHECK(counts.entities == std::vector<std::size_t>{1077, 821, 122, 312});
  CHECK(counts.tokens == std::vector<std::size_t>{2654, 3294, 374, 2385});
}

TEST_CASE("split_corpus") {
  GenSpec spec;
  spec.n_pages = 100;
  const Corpus c = generate_corpus(spec, 1);

  auto all = split_corpus(c, {1.0, 0.0, 0.0}, 4);
  CHECK(all.train == c);
  CHECK(all.val.empty());
  CHECK(all.test.empty());

  auto s = split_corpus(c, {0.7, 0.15, 0.15}, 4);
  CHECK(s.train.size() == 70);
  CHECK(s.val.size() == 15);
  CHECK(s.test.size() == 15);
  std::set<std::string> ids;
  for (const auto* part : {&s.train, &s.val, &s.test})
    for (const auto& p : *part) CHECK(ids.insert(p.id).second);
  CHECK(ids.size() == 100);

  auto again = split_corpus(c, {0.7, 0.15, 0.15}, 4);
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);

  // floor then remainder to train
  auto odd = split_corpus(generate_corpus(GenSpec{.n_pages = 11}, 2), {0.5, 0.25, 0.25}, 0);
  CHECK(odd.val.size() == 2);
  CHECK(odd.test.size() == 2);
  CHECK(odd.train.size() == 7);

  CHECK_THROWS_AS(split_corpus(c, {0.5, 0.2, 0.2}, 1), ValidationError);
  CHECK_THROWS_AS(split_corpus(c, {1.2, -0.1, -0.1}, 1), ValidationError);
}
