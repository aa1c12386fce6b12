#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nertk/encoder.hpp"
#include "nertk/metrics.hpp"
#include "nertk/resample.hpp"
#include "nertk/train.hpp"

namespace nertk {

// Evaluation protocols for the full pipeline: k-fold cross-validation and
// holdout splits, optionally rebalancing the training portion.

enum class Rebalance {
  None,
  /// Duplicate sentences carrying under-represented entity types.
  Sentences,
  /// SMOTE over per-token BiLSTM features; a softmax head trained on the
  /// balanced rows replaces the CRF at prediction time.
  TokenFeatures,
};

struct ProtocolConfig {
  enum class Kind { KFold, Holdout } kind = Kind::KFold;
  std::size_t folds = 10;
  double train_fraction = 0.8;
  Rebalance rebalance = Rebalance::None;
  SmoteConfig smote;
  std::size_t head_epochs = 20;
  TrainConfig train;
  const EmbeddingTable* pretrained = nullptr;
};

struct FoldResult {
  std::size_t fold = 0;
  std::size_t train_sentences = 0;
  std::size_t test_sentences = 0;
  Scores conll;
};

struct ProtocolResult {
  std::vector<FoldResult> folds;
  double mean_f1() const;
  double stddev_f1() const;  ///< population standard deviation across folds
};

ProtocolResult run_protocol(const Corpus& corpus, const ProtocolConfig& config,
                            const std::function<void(const std::string&)>& progress = {});

/// One row per token: the word-BiLSTM output (inference mode) labeled with
/// the token's entity type, or O.
std::vector<FeatureRow> token_feature_rows(const Model& model, const Corpus& corpus);

/// Multinomial logistic regression over feature rows.
struct SoftmaxHead {
  std::vector<std::string> labels;
  Mat weights;  ///< D x C
  Vec bias;

  static SoftmaxHead train(const std::vector<FeatureRow>& rows, std::size_t epochs, double learning_rate,
                           std::size_t batch_size, std::uint64_t seed);
  std::string predict(const Vec& features) const;
};

/// Entity-type labels per token to IOB2 tags; a type change opens a new span.
std::vector<Tag> types_to_iob2(const std::vector<std::string>& labels);

}  // namespace nertk
