#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nertk/config.hpp"
#include "nertk/corpus.hpp"
#include "nertk/model.hpp"

namespace nertk {

struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t batch_size = 20;
  std::size_t max_epochs = 50;
  double dropout = 0.5;
  std::uint64_t seed = 42;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 0.0;      ///< global-norm clipping threshold, 0 = off
  std::size_t patience = 0;    ///< early stop after this many epochs without dev gain, 0 = off
  bool masked_training = false;
  ModelDims dims;

  /// Throws Error on out-of-range values.
  void validate() const;
  /// Unknown keys are rejected.
  void apply(const KeyValues& kv);
  KeyValues to_key_values() const;
};

/// First and second moment estimates shaped like the model, plus the step.
struct AdamState {
  ModelParams m;
  ModelParams v;
  std::uint64_t step = 0;

  static AdamState for_params(const ModelParams& params);
};

/// One bias-corrected Adam update. Rejects gradients with a non-finite entry,
/// naming the offending tensor.
void adam_step(AdamState& state, ModelParams& params, ModelParams& grads, const TrainConfig& config);

/// Scales all gradients so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_global_norm(ModelParams& grads, double max_norm);

using Batch = std::vector<std::size_t>;

/// Seeded shuffle of [0, n) cut into consecutive batches; the last one may be
/// short.
std::vector<Batch> make_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed);

struct KFoldPlan {
  std::vector<std::vector<std::size_t>> folds;

  /// Indices outside fold `k`.
  std::vector<std::size_t> train_indices(std::size_t k) const;
};

struct HoldoutPlan {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Disjoint folds covering [0, n); the first n mod k folds hold one extra index.
KFoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

/// floor(train_fraction * n) seeded-random training indices, the rest test.
HoldoutPlan holdout_split(std::size_t n, double train_fraction, std::uint64_t seed);

Corpus select(const Corpus& corpus, const std::vector<std::size_t>& indices);

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;
  std::optional<double> dev_f1;
};

struct TrainCallbacks {
  const Corpus* dev = nullptr;
  std::function<void(const EpochLog&)> on_epoch;
  /// Called after every optimizer step with (epoch, batch index, batch loss).
  std::function<void(std::size_t, std::size_t, double)> on_step;
};

struct TrainResult {
  std::vector<EpochLog> epochs;
  bool stopped_early = false;
};

/// Minimizes the summed CRF negative log-likelihood per batch with Adam.
/// The corpus must be IOB2 and use only tags known to the model.
TrainResult train_model(Model& model, const Corpus& corpus, const TrainConfig& config,
                        const TrainCallbacks& callbacks = {});

/// Summed NLL over a corpus in inference mode.
double corpus_nll(const Model& model, const Corpus& corpus, bool masked);

struct TensorCheck {
  std::string name;
  std::size_t checked = 0;
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
};

struct GradCheckReport {
  std::vector<TensorCheck> tensors;
  double tolerance = 1e-4;
  double worst() const;
  bool passed() const { return worst() <= tolerance; }
};

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Entries below this magnitude in both gradients count as relative error
  /// against this floor instead of against themselves.
  double floor = 1e-6;
  std::size_t max_entries_per_tensor = 0;  ///< 0 = every entry
  std::uint64_t seed = 0;                  ///< dropout masks and entry sampling
  bool masked = false;
  /// Test hook: mutates the analytic gradient before comparison.
  std::function<void(ModelParams&)> corrupt_analytic;
};

/// Compares the analytic gradient of a sentence's NLL (train mode, fixed
/// dropout masks) to central differences, tensor by tensor.
GradCheckReport gradient_check(const Model& model, const Sentence& sentence,
                               const GradCheckOptions& options = {});

}  // namespace nertk
