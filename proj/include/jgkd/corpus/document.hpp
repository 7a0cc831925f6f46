// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace jgkd::corpus {

enum class SchemaId { kFunsd, kFormNlu };

// Label vocabulary of a form-understanding task. The "other" label is always
// last and is excluded from overall F1.
struct Schema {
  SchemaId id;
  std::string name;
  std::vector<std::string> labels;

  std::size_t num_labels() const { return labels.size(); }
  std::size_t other_label() const { return labels.size() - 1; }
  std::size_t label_index(std::string_view label) const;  // throws SchemaError
};

const Schema& schema(SchemaId id);
SchemaId parse_schema(std::string_view name);  // "funsd" | "formnlu"

struct BBox {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  friend bool operator==(const BBox&, const BBox&) = default;
};

struct Token {
  std::size_t text_id = 0;
  BBox bbox;
  std::size_t entity_id = 0;
  friend bool operator==(const Token&, const Token&) = default;
};

struct Entity {
  std::size_t label = 0;
  std::vector<std::size_t> token_ids;
  std::vector<double> visual_feat;
  BBox bbox;
  friend bool operator==(const Entity&, const Entity&) = default;
};

// k tokens and n entities with a total token -> entity assignment.
struct DocumentPage {
  std::string id;
  SchemaId schema = SchemaId::kFunsd;
  std::vector<Token> tokens;
  std::vector<Entity> entities;

  std::size_t num_tokens() const { return tokens.size(); }
  std::size_t num_entities() const { return entities.size(); }
  // Token labels are inherited from the owning entity.
  std::vector<std::size_t> token_labels() const;
  std::vector<std::size_t> entity_labels() const;
  std::vector<std::size_t> token_owners() const;

  friend bool operator==(const DocumentPage&, const DocumentPage&) = default;
};

using Corpus = std::vector<DocumentPage>;

// Throws ValidationError describing the first broken invariant.
void validate_page(const DocumentPage& page);

struct LabelCounts {
  std::vector<std::size_t> entities;  // per label
  std::vector<std::size_t> tokens;    // per label
  std::size_t total_entities = 0;
  std::size_t total_tokens = 0;
};

LabelCounts count_labels(const Corpus& corpus, SchemaId schema);

}  // namespace jgkd::corpus
