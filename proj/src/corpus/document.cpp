// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "jgkd/corpus/document.hpp"

#include "jgkd/errors.hpp"

namespace jgkd::corpus {

namespace {

const Schema kFunsd{SchemaId::kFunsd, "funsd", {"question", "answer", "header", "other"}};
const Schema kFormNlu{SchemaId::kFormNlu,
                      "formnlu",
                      {"title", "section", "form_key", "form_value", "table_key", "table_value", "other"}};

bool box_ok(const BBox& b) {
  return 0.0 <= b.x0 && b.x0 < b.x1 && b.x1 <= 1.0 && 0.0 <= b.y0 && b.y0 < b.y1 && b.y1 <= 1.0;
}

}  // namespace

std::size_t Schema::label_index(std::string_view label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return i;
  }
  throw SchemaError("label '" + std::string(label) + "' is not part of schema '" + name + "'");
}

const Schema& schema(SchemaId id) { return id == SchemaId::kFunsd ? kFunsd : kFormNlu; }

SchemaId parse_schema(std::string_view name) {
  if (name == "funsd") return SchemaId::kFunsd;
  if (name == "formnlu") return SchemaId::kFormNlu;
  throw SchemaError("unknown schema '" + std::string(name) + "' (expected funsd or formnlu)");
}

std::vector<std::size_t> DocumentPage::token_labels() const {
  std::vector<std::size_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(entities[t.entity_id].label);
  return out;
}

std::vector<std::size_t> DocumentPage::entity_labels() const {
  std::vector<std::size_t> out;
  out.reserve(entities.size());
  for (const auto& e : entities) out.push_back(e.label);
  return out;
}

std::vector<std::size_t> DocumentPage::token_owners() const {
  std::vector<std::size_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.entity_id);
  return out;
}

void validate_page(const DocumentPage& page) {
  const std::string where = "page '" + page.id + "': ";
  const std::size_t k = page.tokens.size();
  const std::size_t n = page.entities.size();
  if (n == 0) throw ValidationError(where + "no entities");
  if (k < n) throw ValidationError(where + "fewer tokens than entities");
  const std::size_t n_labels = schema(page.schema).num_labels();

  std::vector<int> owned(k, 0);
  for (std::size_t e = 0; e < n; ++e) {
    const Entity& ent = page.entities[e];
    if (ent.label >= n_labels) throw ValidationError(where + "entity " + std::to_string(e) + " label out of range");
    if (ent.token_ids.empty()) throw ValidationError(where + "entity " + std::to_string(e) + " has no tokens");
    for (std::size_t t : ent.token_ids) {
      if (t >= k) throw ValidationError(where + "entity " + std::to_string(e) + " lists missing token");
      if (page.tokens[t].entity_id != e) {
        throw ValidationError(where + "token " + std::to_string(t) + " does not point back to entity " +
                              std::to_string(e));
      }
      ++owned[t];
    }
  }
  for (std::size_t t = 0; t < k; ++t) {
    if (owned[t] != 1) throw ValidationError(where + "token " + std::to_string(t) + " is not owned exactly once");
    if (!box_ok(page.tokens[t].bbox)) throw ValidationError(where + "token " + std::to_string(t) + " has a bad box");
  }
}

LabelCounts count_labels(const Corpus& corpus, SchemaId id) {
  const std::size_t c = schema(id).num_labels();
  LabelCounts out{std::vector<std::size_t>(c, 0), std::vector<std::size_t>(c, 0), 0, 0};
  for (const auto& page : corpus) {
    for (const auto& e : page.entities) {
      ++out.entities[e.label];
      out.tokens[e.label] += e.token_ids.size();
      ++out.total_entities;
      out.total_tokens += e.token_ids.size();
    }
  }
  return out;
}

}  // namespace jgkd::corpus
