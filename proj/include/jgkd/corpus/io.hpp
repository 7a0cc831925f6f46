// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "jgkd/corpus/document.hpp"

namespace jgkd::corpus {

// Native corpus format: UTF-8, one JSON object per line, one line per page.
//   {"entities":[{"bbox":[x0,y0,x1,y1],"label":"question","token_ids":[..],
//                 "visual_feat":[..]}, ...],
//    "id":"page-0","schema":"funsd",
//    "tokens":[{"bbox":[..],"entity_id":0,"text_id":17}, ...]}
std::string page_to_json(const DocumentPage& page);
DocumentPage page_from_json(const std::string& line);

void write_corpus(const std::filesystem::path& path, const Corpus& corpus);
Corpus read_corpus(const std::filesystem::path& path);

struct FunsdOptions {
  std::size_t vocab_size = 200;
  std::size_t visual_dim = 16;
};

// Loads every *.json file of a FUNSD-style annotation directory (sorted by
// file name), one page per file. Entities keep file order and tokens keep
// the word order of their entity. Words are hashed into the vocabulary and
// boxes are normalised by the page extent. Warnings (empty directory,
// word-less entities) are appended to `warnings`, or printed to stderr when
// it is null.
Corpus load_funsd(const std::filesystem::path& dir, const FunsdOptions& options = {},
                  std::vector<std::string>* warnings = nullptr);

// Stable vocabulary index for a word (FNV-1a over the lower-cased text).
std::size_t hash_word(std::string_view word, std::size_t vocab_size);

}  // namespace jgkd::corpus
