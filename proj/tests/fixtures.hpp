#pragma once

// Small corpora and models shared by the test binaries.

#include <algorithm>
#include <string>
#include <vector>

#include "nertk/corpus.hpp"
#include "nertk/model.hpp"
#include "nertk/rng.hpp"

namespace fixture {

inline nertk::Corpus tiny_corpus() {
  return nertk::parse_corpus(
      "ሰላም\tB-PER\n"
      "ወደ\tO\n"
      "አዲስ\tB-LOC\n"
      "\n"
      "ab\tO\n"
      "abc\tB-ORG\n"
      "bc\tI-ORG\n"
      "\n",
      nertk::TagScheme::IOB2);
}

inline nertk::ModelDims tiny_dims() {
  nertk::ModelDims d;
  d.char_dim = 3;
  d.char_hidden = 2;
  d.word_dim = 4;
  d.word_hidden = 3;
  return d;
}

/// Random parameters everywhere, including the CRF, so that no gradient is
/// trivially zero.
inline nertk::Model tiny_model(std::uint64_t seed, double dropout = 0.0) {
  nertk::Model m = nertk::init_model(tiny_corpus(), tiny_dims(), dropout, seed);
  nertk::Rng rng(nertk::derive_seed(seed, 99));
  for (auto& t : nertk::tensors(m.params)) {
    for (Eigen::Index i = 0; i < t.data.size(); ++i) t.data.data()[i] = rng.uniform(-0.5, 0.5);
  }
  return m;
}

/// Random valid IOB2 sentence over PER/LOC/ORG, length in [1, max_len].
inline nertk::Sentence random_iob2_sentence(nertk::Rng& rng, std::size_t max_len = 12) {
  static const char* types[] = {"PER", "LOC", "ORG"};
  const std::size_t len = 1 + rng.below(max_len);
  std::vector<nertk::EntitySpan> spans;
  std::size_t i = 0;
  while (i < len) {
    if (rng.uniform() < 0.5) {
      ++i;
      continue;
    }
    const std::size_t span_len = 1 + rng.below(std::min<std::size_t>(3, len - i));
    spans.push_back({i, i + span_len, types[rng.below(3)]});
    i += span_len;
  }
  const auto tags = nertk::spans_to_tags(spans, len, nertk::TagScheme::IOB2);
  nertk::Sentence s;
  for (std::size_t t = 0; t < len; ++t) s.tokens.push_back({"w" + std::to_string(rng.below(20)), tags[t]});
  return s;
}

/// A synthetic IOB2 corpus whose words are drawn from type-specific ranges of
/// a `vocab`-word lexicon, so entity types are recoverable from the surface.
inline nertk::Corpus synthetic_corpus(std::size_t sentences, std::size_t vocab, std::uint64_t seed) {
  static const char* types[] = {"PER", "LOC", "ORG"};
  nertk::Rng rng(seed);
  // Outside words take the first band (plus the remainder), each type one more.
  const std::size_t band = vocab / 4;
  const std::size_t outside = vocab - 3 * band;
  auto word = [&](std::size_t band_index) {
    if (band_index == 0) return "w" + std::to_string(rng.below(outside));
    return "w" + std::to_string(outside + (band_index - 1) * band + rng.below(band));
  };
  nertk::Corpus corpus;
  for (std::size_t s = 0; s < sentences; ++s) {
    nertk::Sentence sentence;
    const std::size_t length = 4 + rng.below(5);
    while (sentence.size() < length) {
      if (rng.uniform() < 0.5) {
        sentence.tokens.push_back({word(0), nertk::Tag::outside()});
        continue;
      }
      const std::size_t t = rng.below(3);
      const std::size_t span = 1 + rng.below(2);
      for (std::size_t i = 0; i < span && sentence.size() < length; ++i) {
        sentence.tokens.push_back(
            {word(t + 1), i == 0 ? nertk::Tag::begin(types[t]) : nertk::Tag::inside(types[t])});
      }
      // An O after every entity keeps span boundaries readable from context.
      if (sentence.size() < length) sentence.tokens.push_back({word(0), nertk::Tag::outside()});
    }
    corpus.push_back(std::move(sentence));
  }
  return corpus;
}

}  // namespace fixture
