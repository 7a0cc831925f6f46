// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "jgkd/corpus/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "jgkd/errors.hpp"

namespace jgkd::corpus {

using nlohmann::json;

namespace {

json box_json(const BBox& b) { return json::array({b.x0, b.y0, b.x1, b.y1}); }

BBox box_from(const json& j) {
  if (!j.is_array() || j.size() != 4) throw ParseError("bbox must be an array of 4 numbers");
  return BBox{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace

std::string page_to_json(const DocumentPage& page) {
  const Schema& sc = schema(page.schema);
  json j;
  j["id"] = page.id;
  j["schema"] = sc.name;
  json tokens = json::array();
  for (const auto& t : page.tokens) {
    tokens.push_back({{"text_id", t.text_id}, {"bbox", box_json(t.bbox)}, {"entity_id", t.entity_id}});
  }
  json entities = json::array();
  for (const auto& e : page.entities) {
    entities.push_back({{"label", sc.labels.at(e.label)},
                        {"token_ids", e.token_ids},
                        {"visual_feat", e.visual_feat},
                        {"bbox", box_json(e.bbox)}});
  }
  j["tokens"] = std::move(tokens);
  j["entities"] = std::move(entities);
  return j.dump();
}

DocumentPage page_from_json(const std::string& line) {
  DocumentPage page;
  try {
    const json j = json::parse(line);
    page.id = j.at("id").get<std::string>();
    page.schema = parse_schema(j.at("schema").get<std::string>());
    const Schema& sc = schema(page.schema);
    for (const auto& t : j.at("tokens")) {
      page.tokens.push_back(
          Token{t.at("text_id").get<std::size_t>(), box_from(t.at("bbox")), t.at("entity_id").get<std::size_t>()});
    }
    for (const auto& e : j.at("entities")) {
      Entity ent;
      ent.label = sc.label_index(e.at("label").get<std::string>());
      ent.token_ids = e.at("token_ids").get<std::vector<std::size_t>>();
      ent.visual_feat = e.at("visual_feat").get<std::vector<double>>();
      ent.bbox = box_from(e.at("bbox"));
      page.entities.push_back(std::move(ent));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed page record: ") + e.what());
  }
  validate_page(page);
  return page;
}

void write_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  for (const auto& page : corpus) out << page_to_json(page) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Corpus read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  Corpus corpus;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      corpus.push_back(page_from_json(line));
    } catch (const Error& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return corpus;
}

std::size_t hash_word(std::string_view word, std::size_t vocab_size) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : word) {
    h ^= static_cast<std::uint64_t>(std::tolower(c));
    h *= 0x100000001b3ULL;
  }
  return static_cast<std::size_t>(h % vocab_size);
}

namespace {

struct RawBox {
  double x0, y0, x1, y1;
};

RawBox raw_box(const json& j, const std::string& file) {
  if (!j.is_array() || j.size() != 4) throw ParseError(file + ": box must have 4 coordinates");
  return RawBox{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

BBox normalise(const RawBox& r, double w, double h) {
  auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
  constexpr double kMinExtent = 1e-4;
  BBox b{clamp01(std::min(r.x0, r.x1) / w), clamp01(std::min(r.y0, r.y1) / h), clamp01(std::max(r.x0, r.x1) / w),
         clamp01(std::max(r.y0, r.y1) / h)};
  if (b.x1 - b.x0 < kMinExtent) {
    b.x0 = std::min(b.x0, 1.0 - kMinExtent);
    b.x1 = b.x0 + kMinExtent;
  }
  if (b.y1 - b.y0 < kMinExtent) {
    b.y0 = std::min(b.y0, 1.0 - kMinExtent);
    b.y1 = b.y0 + kMinExtent;
  }
  return b;
}

DocumentPage load_funsd_file(const std::filesystem::path& file, const FunsdOptions& opt,
                             std::vector<std::string>& warnings) {
  const std::string name = file.filename().string();
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open '" + file.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(name + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("form") || !doc["form"].is_array()) {
    throw ParseError(name + ": missing \"form\" array");
  }
  const Schema& sc = schema(SchemaId::kFunsd);

  struct RawWord {
    std::string text;
    RawBox box;
  };
  struct RawEntity {
    std::size_t label;
    std::vector<RawWord> words;
  };
  std::vector<RawEntity> raw;
  double w = 1.0, h = 1.0;
  try {
    for (const auto& block : doc["form"]) {
      RawEntity ent;
      const std::string label = block.at("label").get<std::string>();
      try {
        ent.label = sc.label_index(label);
      } catch (const SchemaError& e) {
        throw SchemaError(name + ": " + e.what());
      }
      const RawBox ebox = raw_box(block.at("box"), name);
      w = std::max({w, ebox.x0, ebox.x1});
      h = std::max({h, ebox.y0, ebox.y1});
      for (const auto& word : block.at("words")) {
        RawWord rw{word.at("text").get<std::string>(), raw_box(word.at("box"), name)};
        w = std::max({w, rw.box.x0, rw.box.x1});
        h = std::max({h, rw.box.y0, rw.box.y1});
        ent.words.push_back(std::move(rw));
      }
      if (ent.words.empty()) {
        warnings.push_back(name + ": entity " + std::to_string(raw.size()) +
                           " has no words; using its text and box as a single token");
        ent.words.push_back(RawWord{block.value("text", std::string{}), ebox});
      }
      raw.push_back(std::move(ent));
    }
  } catch (const json::exception& e) {
    throw ParseError(name + ": " + e.what());
  }

  DocumentPage page;
  page.id = file.stem().string();
  page.schema = SchemaId::kFunsd;
  for (std::size_t e = 0; e < raw.size(); ++e) {
    Entity ent;
    ent.label = raw[e].label;
    ent.visual_feat.assign(opt.visual_dim, 0.0);
    BBox u{1.0, 1.0, 0.0, 0.0};
    for (const auto& word : raw[e].words) {
      Token tok{hash_word(word.text, opt.vocab_size), normalise(word.box, w, h), e};
      u = BBox{std::min(u.x0, tok.bbox.x0), std::min(u.y0, tok.bbox.y0), std::max(u.x1, tok.bbox.x1),
               std::max(u.y1, tok.bbox.y1)};
      ent.token_ids.push_back(page.tokens.size());
      page.tokens.push_back(tok);
    }
    ent.bbox = u;
    page.entities.push_back(std::move(ent));
  }
  if (page.entities.empty()) throw ParseError(name + ": page has no entities");
  validate_page(page);
  return page;
}

}  // namespace

Corpus load_funsd(const std::filesystem::path& dir, const FunsdOptions& options, std::vector<std::string>* warnings) {
  if (!std::filesystem::is_directory(dir)) throw IoError("'" + dir.string() + "' is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<std::string> local;
  std::vector<std::string>& sink = warnings ? *warnings : local;
  if (files.empty()) sink.push_back("'" + dir.string() + "' contains no annotation files; corpus is empty");

  Corpus corpus;
  for (const auto& f : files) corpus.push_back(load_funsd_file(f, options, sink));
  if (!warnings) {
    for (const auto& msg : local) std::cerr << "warning: " << msg << '\n';
  }
  return corpus;
}

}  // namespace jgkd::corpus
