#pragma once

#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nertk/corpus.hpp"
#include "nertk/lstm.hpp"
#include "nertk/rng.hpp"

namespace nertk {

/// Bijection between strings and row indices [0, size).
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> entries);

  /// Returns the index of `entry`, adding it if absent.
  std::size_t add(const std::string& entry);
  std::optional<std::size_t> find(std::string_view entry) const;
  const std::string& at(std::size_t index) const { return entries_.at(index); }
  std::size_t size() const { return entries_.size(); }
  const std::vector<std::string>& entries() const { return entries_; }

 private:
  std::vector<std::string> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// V x D lookup table with a dedicated out-of-vocabulary row. Lookups are
/// exact string matches; there is no case folding.
struct EmbeddingTable {
  std::shared_ptr<const Vocabulary> vocab;
  Mat matrix;
  Vec unk;

  static EmbeddingTable random(std::shared_ptr<const Vocabulary> vocab, Eigen::Index dim, Rng& rng);
  static EmbeddingTable zeros_like(const EmbeddingTable& other);

  Eigen::Index dim() const { return matrix.cols(); }
  std::size_t size() const { return static_cast<std::size_t>(matrix.rows()); }
  std::optional<std::size_t> find(std::string_view token) const;
  Vec lookup(std::string_view token) const;
};

/// Reads the `V D` header plus V lines of `token v1 ... vD`. The unknown row
/// is drawn from the same initializer used for fresh tables.
EmbeddingTable load_embeddings(std::istream& in, std::size_t expected_dim, Rng& rng);
EmbeddingTable load_embeddings_file(const std::string& path, std::size_t expected_dim, Rng& rng);

struct EncoderParams {
  EmbeddingTable chars;
  BiLstmParams char_bilstm;
  EmbeddingTable words;
  BiLstmParams word_bilstm;
  Mat projection;       ///< 2H_word x K
  Vec projection_bias;  ///< K
  double dropout = 0.5;

  Eigen::Index num_tags() const { return projection.cols(); }
  Eigen::Index char_repr_dim() const { return 2 * char_bilstm.hidden(); }
  Eigen::Index input_dim() const { return words.dim() + char_repr_dim(); }

  /// Same shapes and vocabularies, every entry zero.
  static EncoderParams zeros_like(const EncoderParams& other);
};

enum class Mode { Train, Infer };

/// concat(final forward state, final backward state) of the character
/// BiLSTM run over the word's code points.
Vec encode_word_chars(const EncoderParams& params, std::string_view word);

struct EncoderTrace {
  struct Word {
    std::optional<std::size_t> word_row;
    std::vector<std::optional<std::size_t>> char_rows;
    BiLstmTrace chars;
  };
  std::vector<Word> words;
  std::vector<Vec> inputs;        ///< before dropout
  std::vector<Vec> input_masks;   ///< empty when dropout is off
  BiLstmTrace sentence;
  std::vector<Vec> outputs;       ///< after dropout, fed to the projection
  std::vector<Vec> output_masks;
};

/// L x K emission scores. Dropout (inverted, rate params.dropout) is applied
/// to the BiLSTM inputs and outputs in train mode only; its masks are drawn
/// from `seed`.
Mat encode_sentence(const EncoderParams& params, std::span<const std::string> words, Mode mode,
                    std::uint64_t seed, EncoderTrace* trace = nullptr);
Mat encode_sentence(const EncoderParams& params, const Sentence& sentence, Mode mode,
                    std::uint64_t seed, EncoderTrace* trace = nullptr);

/// Accumulates the gradient of a scalar loss into `grad` given dL/d emissions.
void encoder_backward(const EncoderParams& params, const EncoderTrace& trace,
                      const Mat& d_emissions, EncoderParams& grad);

std::vector<std::string> surfaces(const Sentence& sentence);

}  // namespace nertk
