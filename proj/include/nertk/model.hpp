#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nertk/corpus.hpp"
#include "nertk/crf.hpp"
#include "nertk/encoder.hpp"

namespace nertk {

struct ModelDims {
  std::size_t char_dim = 25;
  std::size_t char_hidden = 25;
  std::size_t word_dim = 300;
  std::size_t word_hidden = 100;
};

/// Every trainable tensor of the BiLSTM-CRF. The same type doubles as the
/// gradient accumulator and as Adam's moment buffers.
struct ModelParams {
  EncoderParams encoder;
  CrfParams crf;

  static ModelParams zeros_like(const ModelParams& other);
};

/// A named view of one tensor in row-major logical order.
struct TensorRef {
  std::string name;
  Eigen::Map<Mat> data;
};

/// All tensors in a fixed order; a gradient holder built with zeros_like()
/// enumerates the same names in the same order.
std::vector<TensorRef> tensors(ModelParams& params);

struct ConstTensorRef {
  std::string name;
  Eigen::Map<const Mat> data;
};

std::vector<ConstTensorRef> tensors(const ModelParams& params);

struct Model {
  std::vector<std::string> tags;  ///< IOB2 tag strings, index = CRF state
  ModelDims dims;
  ModelParams params;  ///< params.crf.mask holds the IOB2 constraints
  /// Free-form key/value pairs carried in the model file (config, seed).
  std::map<std::string, std::string> metadata;

  std::size_t tag_index(const Tag& tag) const;
  Tag tag_at(std::size_t index) const;
};

/// "O" followed by B-X, I-X for each type in sorted order.
std::vector<std::string> build_tagset(const Corpus& corpus);

Vocabulary build_word_vocabulary(const Corpus& corpus);
Vocabulary build_char_vocabulary(const Corpus& corpus);

/// Fresh model. When `pretrained` is given its rows seed the word table; words
/// of the corpus missing from it get random rows.
Model init_model(const Corpus& corpus, const ModelDims& dims, double dropout, std::uint64_t seed,
                 const EmbeddingTable* pretrained = nullptr);

/// Gold tag indices for an IOB2 sentence.
TagSequence gold_sequence(const Model& model, const Sentence& sentence);

/// Sentence NLL; when `grad` is non-null, its gradient is added into it.
double sentence_nll(const Model& model, const Sentence& sentence, Mode mode, std::uint64_t seed,
                    bool masked_training, ModelParams* grad);

/// Constrained Viterbi decoding of a sentence into IOB2 tags.
std::vector<Tag> tag_sentence(const Model& model, std::span<const std::string> words);
Corpus tag_corpus(const Model& model, const Corpus& corpus);

}  // namespace nertk
