#include "nertk/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "nertk/error.hpp"
#include "nertk/metrics.hpp"
#include "nertk/rng.hpp"

namespace nertk {

// --- config ----------------------------------------------------------------------

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw Error("learning_rate must be positive");
  if (batch_size < 1) throw Error("batch_size must be at least 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("dropout must lie in [0, 1)");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw Error("Adam betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw Error("epsilon must be positive");
  if (clip_norm < 0.0) throw Error("clip_norm must be non-negative");
  if (dims.char_dim == 0 || dims.char_hidden == 0 || dims.word_dim == 0 || dims.word_hidden == 0) {
    throw Error("model dimensions must be positive");
  }
}

namespace {

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw Error("config '" + key + "': expected a number, got '" + v + "'");
  return x;
}

std::uint64_t to_count(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw Error("config '" + key + "': expected a non-negative integer, got '" + v + "'");
  }
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw Error("config '" + key + "': value out of range");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error("config '" + key + "': expected true or false, got '" + v + "'");
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void TrainConfig::apply(const KeyValues& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "learning_rate") learning_rate = to_double(key, value);
    else if (key == "batch_size") batch_size = to_count(key, value);
    else if (key == "max_epochs") max_epochs = to_count(key, value);
    else if (key == "dropout") dropout = to_double(key, value);
    else if (key == "seed") seed = to_count(key, value);
    else if (key == "beta1") beta1 = to_double(key, value);
    else if (key == "beta2") beta2 = to_double(key, value);
    else if (key == "epsilon") epsilon = to_double(key, value);
    else if (key == "clip_norm") clip_norm = to_double(key, value);
    else if (key == "patience") patience = to_count(key, value);
    else if (key == "masked_training") masked_training = to_bool(key, value);
    else if (key == "char_dim") dims.char_dim = to_count(key, value);
    else if (key == "char_hidden") dims.char_hidden = to_count(key, value);
    else if (key == "word_dim") dims.word_dim = to_count(key, value);
    else if (key == "word_hidden") dims.word_hidden = to_count(key, value);
    else throw Error("unknown config key '" + key + "'");
  }
}

KeyValues TrainConfig::to_key_values() const {
  return {{"learning_rate", format_double(learning_rate)},
          {"batch_size", std::to_string(batch_size)},
          {"max_epochs", std::to_string(max_epochs)},
          {"dropout", format_double(dropout)},
          {"seed", std::to_string(seed)},
          {"beta1", format_double(beta1)},
          {"beta2", format_double(beta2)},
          {"epsilon", format_double(epsilon)},
          {"clip_norm", format_double(clip_norm)},
          {"patience", std::to_string(patience)},
          {"masked_training", masked_training ? "true" : "false"},
          {"char_dim", std::to_string(dims.char_dim)},
          {"char_hidden", std::to_string(dims.char_hidden)},
          {"word_dim", std::to_string(dims.word_dim)},
          {"word_hidden", std::to_string(dims.word_hidden)}};
}

// --- Adam --------------------------------------------------------------------------

AdamState AdamState::for_params(const ModelParams& params) {
  return {ModelParams::zeros_like(params), ModelParams::zeros_like(params), 0};
}

void adam_step(AdamState& state, ModelParams& params, ModelParams& grads, const TrainConfig& config) {
  auto p = tensors(params);
  auto g = tensors(grads);
  auto m = tensors(state.m);
  auto v = tensors(state.v);
  if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size()) {
    throw Error("Adam: tensor lists differ in length");
  }
  for (std::size_t t = 0; t < p.size(); ++t) {
    for (const auto* other : {&g[t], &m[t], &v[t]}) {
      if (other->name != p[t].name || other->data.rows() != p[t].data.rows() ||
          other->data.cols() != p[t].data.cols()) {
        throw Error("Adam: shape mismatch for tensor " + p[t].name);
      }
    }
    if (!g[t].data.allFinite()) throw Error("non-finite gradient in tensor " + g[t].name);
  }

  ++state.step;
  const double b1 = config.beta1, b2 = config.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t t = 0; t < p.size(); ++t) {
    double* pd = p[t].data.data();
    const double* gd = g[t].data.data();
    double* md = m[t].data.data();
    double* vd = v[t].data.data();
    const auto n = p[t].data.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      md[i] = b1 * md[i] + (1.0 - b1) * gd[i];
      vd[i] = b2 * vd[i] + (1.0 - b2) * gd[i] * gd[i];
      const double m_hat = md[i] / correction1;
      const double v_hat = vd[i] / correction2;
      pd[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

double clip_global_norm(ModelParams& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& t : tensors(grads)) sq += t.data.squaredNorm();
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& t : tensors(grads)) t.data *= scale;
  }
  return norm;
}

// --- batching and splits -------------------------------------------------------------

std::vector<Batch> make_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed) {
  if (batch_size == 0) throw Error("batch size must be at least 1");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<Batch> batches;
  for (std::size_t i = 0; i < n; i += batch_size) {
    batches.emplace_back(order.begin() + static_cast<long>(i),
                         order.begin() + static_cast<long>(std::min(n, i + batch_size)));
  }
  return batches;
}

std::vector<std::size_t> KFoldPlan::train_indices(std::size_t k) const {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    if (f != k) out.insert(out.end(), folds[f].begin(), folds[f].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

KFoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error("k-fold needs at least 2 folds");
  if (k > n) throw Error("cannot split " + std::to_string(n) + " items into " + std::to_string(k) + " folds");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  KFoldPlan plan;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    std::vector<std::size_t> fold(order.begin() + static_cast<long>(pos),
                                  order.begin() + static_cast<long>(pos + size));
    std::sort(fold.begin(), fold.end());
    plan.folds.push_back(std::move(fold));
    pos += size;
  }
  return plan;
}

HoldoutPlan holdout_split(std::size_t n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw Error("train fraction must lie in (0, 1)");
  // The epsilon keeps e.g. 2/3 * 9 from flooring to 5.
  const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 1e-9));
  if (n_train == 0 || n_train == n) {
    throw Error("split of " + std::to_string(n) + " items at " + std::to_string(train_fraction) +
                " leaves one side empty");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  HoldoutPlan plan;
  plan.train.assign(order.begin(), order.begin() + static_cast<long>(n_train));
  plan.test.assign(order.begin() + static_cast<long>(n_train), order.end());
  std::sort(plan.train.begin(), plan.train.end());
  std::sort(plan.test.begin(), plan.test.end());
  return plan;
}

Corpus select(const Corpus& corpus, const std::vector<std::size_t>& indices) {
  Corpus out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(corpus.at(i));
  return out;
}

// --- training loop --------------------------------------------------------------------

double corpus_nll(const Model& model, const Corpus& corpus, bool masked) {
  double total = 0.0;
  for (const auto& s : corpus) total += sentence_nll(model, s, Mode::Infer, 0, masked, nullptr);
  return total;
}

namespace {

void zero(ModelParams& grads) {
  for (auto& t : tensors(grads)) t.data.setZero();
}

}  // namespace

TrainResult train_model(Model& model, const Corpus& corpus, const TrainConfig& config,
                        const TrainCallbacks& callbacks) {
  config.validate();
  if (corpus.empty()) throw Error("training corpus is empty");
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    if (!validate_tags(corpus[s], TagScheme::IOB2).empty()) {
      throw Error("training sentence " + std::to_string(s) + " is not valid IOB2");
    }
  }
  model.params.encoder.dropout = config.dropout;

  TrainResult result;
  AdamState adam = AdamState::for_params(model.params);
  ModelParams grads = ModelParams::zeros_like(model.params);
  double best_dev = -1.0;
  std::size_t since_best = 0;
  std::optional<ModelParams> best_params;

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    const std::uint64_t epoch_seed = derive_seed(config.seed, epoch);
    const auto batches = make_batches(corpus.size(), config.batch_size, epoch_seed);
    EpochLog log;
    log.epoch = epoch + 1;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      zero(grads);
      double batch_loss = 0.0;
      for (const std::size_t idx : batches[b]) {
        const std::uint64_t sentence_seed = derive_seed(epoch_seed, idx + 1);
        batch_loss += sentence_nll(model, corpus[idx], Mode::Train, sentence_seed, config.masked_training, &grads);
      }
      if (!std::isfinite(batch_loss)) {
        throw Error("non-finite loss in epoch " + std::to_string(epoch + 1) + ", batch " + std::to_string(b + 1));
      }
      if (config.clip_norm > 0.0) clip_global_norm(grads, config.clip_norm);
      adam_step(adam, model.params, grads, config);
      log.loss += batch_loss;
      if (callbacks.on_step) callbacks.on_step(epoch + 1, b + 1, batch_loss);
    }
    if (callbacks.dev) {
      const Corpus predicted = tag_corpus(model, *callbacks.dev);
      log.dev_f1 = conll_evaluate(*callbacks.dev, predicted).overall.scores().f1;
    }
    result.epochs.push_back(log);
    if (callbacks.on_epoch) callbacks.on_epoch(log);

    if (config.patience > 0 && log.dev_f1) {
      if (*log.dev_f1 > best_dev) {
        best_dev = *log.dev_f1;
        since_best = 0;
        best_params = model.params;
      } else if (++since_best >= config.patience) {
        result.stopped_early = true;
        break;
      }
    }
  }
  if (result.stopped_early && best_params) model.params = std::move(*best_params);
  return result;
}

// --- gradient check ---------------------------------------------------------------------

double GradCheckReport::worst() const {
  double w = 0.0;
  for (const auto& t : tensors) w = std::max(w, t.max_relative_error);
  return w;
}

GradCheckReport gradient_check(const Model& model, const Sentence& sentence, const GradCheckOptions& options) {
  GradCheckReport report;
  report.tolerance = options.tolerance;

  ModelParams analytic = ModelParams::zeros_like(model.params);
  sentence_nll(model, sentence, Mode::Train, options.seed, options.masked, &analytic);
  if (options.corrupt_analytic) options.corrupt_analytic(analytic);

  Model probe = model;
  auto params = tensors(probe.params);
  const auto grads = tensors(analytic);
  Rng sampler(derive_seed(options.seed, 7));
  const auto loss = [&] { return sentence_nll(probe, sentence, Mode::Train, options.seed, options.masked, nullptr); };

  for (std::size_t t = 0; t < params.size(); ++t) {
    TensorCheck check;
    check.name = params[t].name;
    const auto n = static_cast<std::size_t>(params[t].data.size());
    std::vector<std::size_t> entries(n);
    std::iota(entries.begin(), entries.end(), 0);
    if (options.max_entries_per_tensor > 0 && n > options.max_entries_per_tensor) {
      sampler.shuffle(entries);
      entries.resize(options.max_entries_per_tensor);
    }
    double* data = params[t].data.data();
    const double* g = grads[t].data.data();
    for (const std::size_t i : entries) {
      const double saved = data[i];
      data[i] = saved + options.step;
      const double plus = loss();
      data[i] = saved - options.step;
      const double minus = loss();
      data[i] = saved;
      const double numeric = (plus - minus) / (2.0 * options.step);
      const double abs_err = std::abs(numeric - g[i]);
      const double denom = std::max({std::abs(numeric), std::abs(g[i]), options.floor});
      check.max_absolute_error = std::max(check.max_absolute_error, abs_err);
      check.max_relative_error = std::max(check.max_relative_error, abs_err / denom);
      if (!std::isfinite(numeric) || !std::isfinite(g[i])) check.max_relative_error = INFINITY;
      ++check.checked;
    }
    report.tensors.push_back(std::move(check));
  }
  return report;
}

}  // namespace nertk
