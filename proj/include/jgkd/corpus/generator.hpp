// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>

#include "jgkd/corpus/document.hpp"

namespace jgkd::corpus {

// Parameters of the synthetic form generator.
//
// Each label owns a contiguous block of the vocabulary, a horizontal layout
// band and a mean visual vector. `signal` is the probability that a token's
// text id and an entity's layout follow their label (otherwise they are
// drawn uniformly); the visual vector is Gaussian around the label mean with
// standard deviation 1 - signal. `noise_rate` independently resamples a
// token's text id uniformly, the analogue of scan/handwriting noise.
struct GenSpec {
  std::size_t n_pages = 100;
  SchemaId schema = SchemaId::kFunsd;
  std::size_t entities_min = 3;
  std::size_t entities_max = 7;
  std::size_t tokens_min = 1;
  std::size_t tokens_max = 5;
  std::size_t vocab_size = 200;
  std::size_t visual_dim = 16;
  double signal = 0.8;
  double noise_rate = 0.0;

  // Throws ValidationError naming every offending field.
  void validate() const;
};

Corpus generate_corpus(const GenSpec& spec, std::uint64_t seed);

// Label a text id maps to under the generator's vocabulary blocks, or the
// label count if the id lies past the last block.
std::size_t vocab_block_label(std::size_t text_id, std::size_t vocab_size, std::size_t num_labels);

struct CorpusSplit {
  Corpus train;
  Corpus val;
  Corpus test;
};

// Page-level partition. Validation and test sizes are floor(fraction * N);
// the remainder goes to train. Pages keep their original relative order.
CorpusSplit split_corpus(const Corpus& corpus, std::array<double, 3> fractions, std::uint64_t seed);

}  // namespace jgkd::corpus
