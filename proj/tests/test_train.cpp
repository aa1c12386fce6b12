#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "nertk/config.hpp"
#include "nertk/error.hpp"
#include "nertk/metrics.hpp"
#include "nertk/model_io.hpp"
#include "nertk/train.hpp"

using namespace nertk;

namespace {

std::string model_bytes(const Model& m) {
  std::ostringstream out;
  save_model(out, m);
  return out.str();
}

void expect_partition(const std::vector<std::vector<std::size_t>>& parts, std::size_t n) {
  std::vector<std::size_t> all;
  for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expected(n);
  std::iota(expected.begin(), expected.end(), 0);
  CHECK(all == expected);
}

}  // namespace

TEST_CASE("adam first step on a scalar moves by the learning rate") {
  Model m = fixture::tiny_model(1);
  ModelParams grads = ModelParams::zeros_like(m.params);
  grads.crf.start(0) = 1.0;
  const double before = m.params.crf.start(0);
  const double other = m.params.crf.start(1);
  AdamState state = AdamState::for_params(m.params);
  TrainConfig config;
  adam_step(state, m.params, grads, config);
  CHECK(state.step == 1);
  CHECK(before - m.params.crf.start(0) == doctest::Approx(0.001 / (1.0 + 1e-8)).epsilon(1e-12));
  CHECK(m.params.crf.start(1) == other);

  // Magnitude of the first step does not depend on the gradient scale.
  Model m2 = fixture::tiny_model(1);
  ModelParams g2 = ModelParams::zeros_like(m2.params);
  g2.crf.start(0) = -250.0;
  AdamState s2 = AdamState::for_params(m2.params);
  adam_step(s2, m2.params, g2, config);
  CHECK(m2.params.crf.start(0) - before == doctest::Approx(0.001).epsilon(1e-9));
}

TEST_CASE("adam with zero gradient is the identity") {
  Model m = fixture::tiny_model(2);
  const std::string bytes = model_bytes(m);
  ModelParams zero = ModelParams::zeros_like(m.params);
  AdamState state = AdamState::for_params(m.params);
  for (int i = 0; i < 5; ++i) adam_step(state, m.params, zero, TrainConfig{});
  CHECK(model_bytes(m) == bytes);
}

TEST_CASE("adam rejects non-finite gradients by tensor name") {
  Model m = fixture::tiny_model(3);
  ModelParams grads = ModelParams::zeros_like(m.params);
  grads.encoder.projection(0, 0) = NAN;
  AdamState state = AdamState::for_params(m.params);
  try {
    adam_step(state, m.params, grads, TrainConfig{});
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("projection.weight") != std::string::npos);
  }

  Model other = init_model(fixture::synthetic_corpus(3, 12, 1), fixture::tiny_dims(), 0.0, 1);
  ModelParams wrong = ModelParams::zeros_like(other.params);
  CHECK_THROWS_AS(adam_step(state, m.params, wrong, TrainConfig{}), Error);
}

TEST_CASE("clip_global_norm") {
  Model m = fixture::tiny_model(4);
  ModelParams g = ModelParams::zeros_like(m.params);
  g.crf.start(0) = 3.0;
  g.crf.end(0) = 4.0;
  CHECK(clip_global_norm(g, 1.0) == doctest::Approx(5.0));
  CHECK(g.crf.start(0) == doctest::Approx(0.6));
  CHECK(g.crf.end(0) == doctest::Approx(0.8));
  CHECK(clip_global_norm(g, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("make_batches") {
  auto sizes = [](const std::vector<Batch>& b) {
    std::vector<std::size_t> s;
    for (const auto& x : b) s.push_back(x.size());
    return s;
  };
  const auto b = make_batches(45, 20, 1);
  CHECK(sizes(b) == std::vector<std::size_t>{20, 20, 5});
  expect_partition(b, 45);
  CHECK(sizes(make_batches(3, 1, 1)) == std::vector<std::size_t>{1, 1, 1});
  CHECK(make_batches(45, 20, 9) == make_batches(45, 20, 9));
  CHECK_FALSE(make_batches(45, 20, 9) == make_batches(45, 20, 10));
}

TEST_CASE("kfold_split") {
  const auto ten = kfold_split(10, 10, 1);
  CHECK(ten.folds.size() == 10);
  for (const auto& f : ten.folds) CHECK(f.size() == 1);
  const auto three = kfold_split(10, 3, 1);
  CHECK(three.folds[0].size() == 4);
  CHECK(three.folds[1].size() == 3);
  CHECK(three.folds[2].size() == 3);
  expect_partition(three.folds, 10);
  for (std::size_t k = 0; k < 3; ++k) {
    auto train = three.train_indices(k);
    expect_partition({train, three.folds[k]}, 10);
  }
  for (std::size_t n = 2; n < 40; ++n) {
    for (std::size_t k = 2; k <= std::min<std::size_t>(n, 12); ++k) {
      const auto plan = kfold_split(n, k, n * 31 + k);
      expect_partition(plan.folds, n);
      std::size_t lo = n, hi = 0;
      for (const auto& f : plan.folds) {
        lo = std::min(lo, f.size());
        hi = std::max(hi, f.size());
      }
      CHECK(hi - lo <= 1);
    }
  }
  CHECK_THROWS_AS(kfold_split(3, 4, 1), Error);
  CHECK_THROWS_AS(kfold_split(3, 1, 1), Error);
}

TEST_CASE("holdout_split") {
  const auto a = holdout_split(9, 2.0 / 3.0, 1);
  CHECK(a.train.size() == 6);
  CHECK(a.test.size() == 3);
  expect_partition({a.train, a.test}, 9);
  const auto b = holdout_split(10, 0.8, 1);
  CHECK(b.train.size() == 8);
  CHECK(b.test.size() == 2);
  expect_partition({b.train, b.test}, 10);
  CHECK(holdout_split(10, 0.8, 5).train == holdout_split(10, 0.8, 5).train);
  CHECK_THROWS_AS(holdout_split(1, 0.5, 1), Error);
  CHECK_THROWS_AS(holdout_split(10, 1.0, 1), Error);
  CHECK_THROWS_AS(holdout_split(10, 0.0, 1), Error);
}

TEST_CASE("TrainConfig key-value handling") {
  TrainConfig c;
  c.apply({{"learning_rate", "0.01"}, {"batch_size", "5"}, {"masked_training", "true"}, {"word_hidden", "7"}});
  CHECK(c.learning_rate == 0.01);
  CHECK(c.batch_size == 5);
  CHECK(c.masked_training);
  CHECK(c.dims.word_hidden == 7);
  TrainConfig round;
  round.apply(c.to_key_values());
  CHECK(round.to_key_values() == c.to_key_values());
  CHECK_THROWS_AS(c.apply({{"learning_rat", "1"}}), Error);
  CHECK_THROWS_AS(c.apply({{"batch_size", "-2"}}), Error);
  c.dropout = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);

  std::istringstream in("# comment\nseed=7\n\nmax_epochs = 3\n");
  const auto kv = parse_key_values(in);
  CHECK(kv.at("seed") == "7");
  CHECK(kv.at("max_epochs") == "3");
  std::istringstream dup("a=1\na=2\n");
  CHECK_THROWS_AS(parse_key_values(dup), Error);
}

TEST_CASE("train_model with zero epochs leaves parameters unchanged") {
  const auto corpus = fixture::synthetic_corpus(5, 20, 1);
  Model m = init_model(corpus, fixture::tiny_dims(), 0.0, 3);
  const std::string before = model_bytes(m);
  TrainConfig c;
  c.max_epochs = 0;
  c.dropout = 0.0;
  c.dims = fixture::tiny_dims();
  const auto result = train_model(m, corpus, c);
  CHECK(result.epochs.empty());
  CHECK(model_bytes(m) == before);
}

TEST_CASE("train_model is deterministic") {
  const auto corpus = fixture::synthetic_corpus(12, 24, 2);
  TrainConfig c;
  c.max_epochs = 3;
  c.batch_size = 5;
  c.dropout = 0.5;
  c.dims = fixture::tiny_dims();
  auto run = [&] {
    Model m = init_model(corpus, c.dims, c.dropout, c.seed);
    std::vector<double> losses;
    TrainCallbacks cb;
    cb.on_step = [&](std::size_t, std::size_t, double loss) { losses.push_back(loss); };
    const auto r = train_model(m, corpus, c, cb);
    std::ostringstream log;
    log.precision(17);
    for (const auto& e : r.epochs) log << e.epoch << ' ' << e.loss << '\n';
    for (double l : losses) log << l << '\n';
    return std::pair{model_bytes(m), log.str()};
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("training loss mostly decreases over the first epoch") {
  const auto corpus = fixture::synthetic_corpus(60, 40, 3);
  TrainConfig c;
  c.max_epochs = 1;
  c.batch_size = 1;
  c.learning_rate = 0.01;
  c.dropout = 0.0;
  c.dims = fixture::tiny_dims();
  Model m = init_model(corpus, c.dims, c.dropout, c.seed);
  // Evaluation points: full-corpus NLL after each block of ten updates.
  std::vector<double> points{corpus_nll(m, corpus, false)};
  TrainCallbacks cb;
  cb.on_step = [&](std::size_t, std::size_t batch, double) {
    if (batch % 10 == 0) points.push_back(corpus_nll(m, corpus, false));
  };
  train_model(m, corpus, c, cb);
  std::size_t ok = 0;
  for (std::size_t i = 1; i < points.size(); ++i) ok += points[i] <= points[i - 1];
  CHECK(points.size() == 7);
  CHECK(static_cast<double>(ok) >= 0.9 * static_cast<double>(points.size() - 1));
}

TEST_CASE("train_model reports dev F1 and honours patience") {
  const auto corpus = fixture::synthetic_corpus(10, 24, 4);
  TrainConfig c;
  c.max_epochs = 30;
  c.batch_size = 10;
  c.dropout = 0.0;
  c.learning_rate = 1e-9;  // nothing improves, so patience must trigger
  c.patience = 2;
  c.dims = fixture::tiny_dims();
  Model m = init_model(corpus, c.dims, c.dropout, c.seed);
  TrainCallbacks cb;
  cb.dev = &corpus;
  const auto r = train_model(m, corpus, c, cb);
  CHECK(r.stopped_early);
  CHECK(r.epochs.size() < 30);
  for (const auto& e : r.epochs) CHECK(e.dev_f1.has_value());
}

TEST_CASE("gradient_check passes on random tiny models and catches corruption") {
  const auto corpus = fixture::tiny_corpus();
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Model m = fixture::tiny_model(seed, 0.3);
    GradCheckOptions opt;
    opt.seed = seed;
    const auto report = gradient_check(m, corpus[seed % 2], opt);
    CHECK(report.passed());
    CHECK(report.tensors.size() == tensors(m.params).size());
    for (const auto& t : report.tensors) {
      INFO(t.name << " " << t.max_relative_error);
      CHECK(t.max_relative_error <= 1e-4);
    }
  }

  // All-zero parameters: gradients are still finite and agree.
  Model zero = fixture::tiny_model(1);
  for (auto& t : tensors(zero.params)) t.data.setZero();
  CHECK(gradient_check(zero, corpus[0]).passed());

  GradCheckOptions broken;
  broken.corrupt_analytic = [](ModelParams& g) { g.encoder.word_bilstm.forward.w_ix(0, 0) += 0.05; };
  const auto bad = gradient_check(fixture::tiny_model(5), corpus[0], broken);
  CHECK_FALSE(bad.passed());
  for (const auto& t : bad.tensors) {
    if (t.name == "word_bilstm.forward.w_ix") CHECK(t.max_relative_error > 1e-2);
  }
}

TEST_CASE("masked training keeps the gold path legal and trains") {
  const auto corpus = fixture::synthetic_corpus(8, 24, 6);
  TrainConfig c;
  c.max_epochs = 2;
  c.batch_size = 4;
  c.masked_training = true;
  c.dims = fixture::tiny_dims();
  Model m = init_model(corpus, c.dims, 0.5, c.seed);
  const auto r = train_model(m, corpus, c);
  CHECK(r.epochs.size() == 2);
  CHECK(std::isfinite(r.epochs.back().loss));
}
