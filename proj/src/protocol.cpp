#include "nertk/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "nertk/error.hpp"
#include "nertk/rng.hpp"

namespace nertk {

double ProtocolResult::mean_f1() const {
  if (folds.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& f : folds) sum += f.conll.f1;
  return sum / static_cast<double>(folds.size());
}

double ProtocolResult::stddev_f1() const {
  if (folds.empty()) return 0.0;
  const double mean = mean_f1();
  double sq = 0.0;
  for (const auto& f : folds) sq += (f.conll.f1 - mean) * (f.conll.f1 - mean);
  return std::sqrt(sq / static_cast<double>(folds.size()));
}

std::vector<FeatureRow> token_feature_rows(const Model& model, const Corpus& corpus) {
  std::vector<FeatureRow> rows;
  for (const auto& sentence : corpus) {
    EncoderTrace trace;
    encode_sentence(model.params.encoder, sentence, Mode::Infer, 0, &trace);
    for (std::size_t t = 0; t < sentence.size(); ++t) {
      const Vec& out = trace.outputs[t];
      FeatureRow row;
      row.values.assign(out.data(), out.data() + out.size());
      row.label = sentence.tokens[t].tag.is_outside() ? "O" : sentence.tokens[t].tag.type;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

SoftmaxHead SoftmaxHead::train(const std::vector<FeatureRow>& rows, std::size_t epochs, double learning_rate,
                               std::size_t batch_size, std::uint64_t seed) {
  if (rows.empty()) throw Error("softmax head needs training rows");
  SoftmaxHead head;
  std::map<std::string, std::size_t> label_index;
  for (const auto& r : rows) label_index.emplace(r.label, 0);
  for (auto& [label, idx] : label_index) {
    idx = head.labels.size();
    head.labels.push_back(label);
  }
  const auto D = static_cast<Eigen::Index>(rows.front().values.size());
  const auto C = static_cast<Eigen::Index>(head.labels.size());
  head.weights = Mat::Zero(D, C);
  head.bias = Vec::Zero(C);

  // Plain Adam on the two tensors.
  Mat mw = Mat::Zero(D, C), vw = Mat::Zero(D, C);
  Vec mb = Vec::Zero(C), vb = Vec::Zero(C);
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::uint64_t step = 0;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    for (const auto& batch : make_batches(rows.size(), batch_size, derive_seed(seed, epoch))) {
      Mat gw = Mat::Zero(D, C);
      Vec gb = Vec::Zero(C);
      for (const auto i : batch) {
        const Vec x = Eigen::Map<const Vec>(rows[i].values.data(), D);
        Vec logits = head.weights.transpose() * x + head.bias;
        logits.array() -= logits.maxCoeff();
        Vec prob = logits.array().exp();
        prob /= prob.sum();
        prob(static_cast<Eigen::Index>(label_index.at(rows[i].label))) -= 1.0;
        gw.noalias() += x * prob.transpose();
        gb += prob;
      }
      ++step;
      const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
      mw = b1 * mw + (1 - b1) * gw;
      vw = b2 * vw + (1 - b2) * gw.cwiseProduct(gw);
      mb = b1 * mb + (1 - b1) * gb;
      vb = b2 * vb + (1 - b2) * gb.cwiseProduct(gb);
      head.weights.array() -= learning_rate * (mw.array() / c1) / ((vw.array() / c2).sqrt() + eps);
      head.bias.array() -= learning_rate * (mb.array() / c1) / ((vb.array() / c2).sqrt() + eps);
    }
  }
  return head;
}

std::string SoftmaxHead::predict(const Vec& features) const {
  const Vec logits = weights.transpose() * features + bias;
  Eigen::Index best = 0;
  logits.maxCoeff(&best);
  return labels[static_cast<std::size_t>(best)];
}

std::vector<Tag> types_to_iob2(const std::vector<std::string>& labels) {
  std::vector<Tag> tags;
  tags.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == "O") {
      tags.push_back(Tag::outside());
    } else if (i > 0 && labels[i - 1] == labels[i]) {
      tags.push_back(Tag::inside(labels[i]));
    } else {
      tags.push_back(Tag::begin(labels[i]));
    }
  }
  return tags;
}

namespace {

FoldResult run_fold(const Corpus& train_in, const Corpus& test, const ProtocolConfig& config, std::size_t fold,
                    const std::function<void(const std::string&)>& progress) {
  const std::uint64_t fold_seed = derive_seed(config.train.seed, 1000 + fold);
  Corpus train = train_in;
  if (config.rebalance == Rebalance::Sentences) train = oversample_entity_sentences(train, fold_seed);

  Corpus vocab_corpus = train;
  if (config.pretrained) vocab_corpus.insert(vocab_corpus.end(), test.begin(), test.end());
  Model model = init_model(vocab_corpus, config.train.dims, config.train.dropout, fold_seed, config.pretrained);
  TrainConfig tc = config.train;
  tc.seed = fold_seed;
  TrainCallbacks cb;
  if (progress) {
    cb.on_epoch = [&](const EpochLog& log) {
      progress("fold " + std::to_string(fold + 1) + " epoch " + std::to_string(log.epoch) +
               " loss " + std::to_string(log.loss));
    };
  }
  train_model(model, train, tc, cb);

  Corpus predicted;
  if (config.rebalance == Rebalance::TokenFeatures) {
    SmoteConfig sc = config.smote;
    sc.seed = derive_seed(fold_seed, 1);
    BalanceTarget target;
    target.match_majority = true;
    const auto balanced = balance_token_dataset(token_feature_rows(model, train), target, sc);
    const SoftmaxHead head = SoftmaxHead::train(balanced, config.head_epochs, config.train.learning_rate,
                                                config.train.batch_size, derive_seed(fold_seed, 2));
    predicted = test;
    for (auto& sentence : predicted) {
      EncoderTrace trace;
      encode_sentence(model.params.encoder, sentence, Mode::Infer, 0, &trace);
      std::vector<std::string> labels;
      for (const auto& out : trace.outputs) labels.push_back(head.predict(out));
      const auto tags = types_to_iob2(labels);
      for (std::size_t t = 0; t < tags.size(); ++t) sentence.tokens[t].tag = tags[t];
    }
  } else {
    predicted = tag_corpus(model, test);
  }
  FoldResult r;
  r.fold = fold + 1;
  r.train_sentences = train.size();
  r.test_sentences = test.size();
  r.conll = conll_evaluate(test, predicted).overall.scores();
  return r;
}

}  // namespace

ProtocolResult run_protocol(const Corpus& corpus, const ProtocolConfig& config,
                            const std::function<void(const std::string&)>& progress) {
  ProtocolResult result;
  if (config.kind == ProtocolConfig::Kind::KFold) {
    const KFoldPlan plan = kfold_split(corpus.size(), config.folds, config.train.seed);
    for (std::size_t k = 0; k < plan.folds.size(); ++k) {
      result.folds.push_back(
          run_fold(select(corpus, plan.train_indices(k)), select(corpus, plan.folds[k]), config, k, progress));
    }
  } else {
    const HoldoutPlan plan = holdout_split(corpus.size(), config.train_fraction, config.train.seed);
    result.folds.push_back(run_fold(select(corpus, plan.train), select(corpus, plan.test), config, 0, progress));
  }
  return result;
}

}  // namespace nertk
