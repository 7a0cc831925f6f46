// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "jgkd/corpus/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "jgkd/errors.hpp"
#include "jgkd/random.hpp"

namespace jgkd::corpus {

void GenSpec::validate() const {
  std::vector<std::string> bad;
  if (entities_min < 1 || entities_min > entities_max) bad.push_back("entities_min/entities_max");
  if (tokens_min < 1 || tokens_min > tokens_max) bad.push_back("tokens_min/tokens_max");
  if (vocab_size < corpus::schema(schema).num_labels()) bad.push_back("vocab_size");
  if (visual_dim < 1) bad.push_back("visual_dim");
  if (!(signal >= 0.0 && signal <= 1.0)) bad.push_back("signal");
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) bad.push_back("noise_rate");
  if (!bad.empty()) {
    std::string msg = "invalid generator spec:";
    for (const auto& b : bad) msg += " " + b;
    throw ValidationError(msg);
  }
}

std::size_t vocab_block_label(std::size_t text_id, std::size_t vocab_size, std::size_t num_labels) {
  const std::size_t block = vocab_size / num_labels;
  return std::min(text_id / block, num_labels);
}

namespace {

DocumentPage generate_page(const GenSpec& spec, std::size_t index, Rng& rng) {
  const std::size_t n_labels = schema(spec.schema).num_labels();
  const std::size_t block = spec.vocab_size / n_labels;
  const double band = 1.0 / static_cast<double>(n_labels);

  DocumentPage page;
  page.id = "page-" + std::to_string(index);
  page.schema = spec.schema;

  const std::size_t n = uniform_index(rng, spec.entities_min, spec.entities_max);
  const double row_h = 1.0 / static_cast<double>(n);

  for (std::size_t e = 0; e < n; ++e) {
    Entity ent;
    ent.label = uniform_index(rng, 0, n_labels - 1);

    // One entity per row, top to bottom; x placement follows the label band.
    const double width = uniform(rng, 0.35, 0.9) * band * 2.0;
    double x0 = 0.0;
    if (bernoulli(rng, spec.signal)) {
      x0 = static_cast<double>(ent.label) * band * 0.5 + uniform(rng, 0.0, 0.05);
    } else {
      x0 = uniform(rng, 0.0, 0.5);
    }
    const double x1 = std::min(1.0, x0 + width);
    const double y0 = static_cast<double>(e) * row_h + uniform(rng, 0.0, 0.1) * row_h;
    const double y1 = y0 + 0.6 * row_h;

    const std::size_t n_tok = uniform_index(rng, spec.tokens_min, spec.tokens_max);
    const double slot = (x1 - x0) / static_cast<double>(n_tok);
    for (std::size_t j = 0; j < n_tok; ++j) {
      Token tok;
      tok.entity_id = e;
      tok.bbox = BBox{x0 + slot * static_cast<double>(j), y0, x0 + slot * (static_cast<double>(j) + 0.9), y1};
      if (bernoulli(rng, spec.signal)) {
        tok.text_id = ent.label * block + uniform_index(rng, 0, block - 1);
      } else {
        tok.text_id = uniform_index(rng, 0, spec.vocab_size - 1);
      }
      if (bernoulli(rng, spec.noise_rate)) tok.text_id = uniform_index(rng, 0, spec.vocab_size - 1);
      ent.token_ids.push_back(page.tokens.size());
      page.tokens.push_back(tok);
    }
    ent.bbox = BBox{x0, y0, x0 + slot * (static_cast<double>(n_tok - 1) + 0.9), y1};

    const double spread = 1.0 - spec.signal;
    ent.visual_feat.resize(spec.visual_dim);
    for (std::size_t j = 0; j < spec.visual_dim; ++j) {
      const double mu = (j % n_labels == ent.label) ? 2.0 : 0.0;
      ent.visual_feat[j] = spread > 0.0 ? normal(rng, mu, spread) : mu;
    }
    page.entities.push_back(std::move(ent));
  }
  return page;
}

}  // namespace

Corpus generate_corpus(const GenSpec& spec, std::uint64_t seed) {
  spec.validate();
  Corpus corpus;
  corpus.reserve(spec.n_pages);
  for (std::size_t i = 0; i < spec.n_pages; ++i) {
    Rng rng(derive_seed(seed, i));
    corpus.push_back(generate_page(spec, i, rng));
  }
  return corpus;
}

CorpusSplit split_corpus(const Corpus& corpus, std::array<double, 3> fractions, std::uint64_t seed) {
  double total = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0)) throw ValidationError("split fractions must be nonnegative");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ValidationError("split fractions must sum to 1");

  const std::size_t n = corpus.size();
  const auto count = [n](double f) {
    return static_cast<std::size_t>(std::floor(f * static_cast<double>(n) + 1e-9));
  };
  const std::size_t n_val = count(fractions[1]);
  const std::size_t n_test = count(fractions[2]);
  const std::size_t n_train = n - n_val - n_test;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  auto take = [&](std::size_t begin, std::size_t len) {
    std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                 order.begin() + static_cast<std::ptrdiff_t>(begin + len));
    std::sort(idx.begin(), idx.end());
    Corpus out;
    for (std::size_t i : idx) out.push_back(corpus[i]);
    return out;
  };
  return CorpusSplit{take(0, n_train), take(n_train, n_val), take(n_train + n_val, n_test)};
}

}  // namespace jgkd::corpus
