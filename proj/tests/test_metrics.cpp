#include "doctest.h"

#include <algorithm>
#include <sstream>

#include "nertk/error.hpp"
#include "nertk/metrics.hpp"
#include "nertk/rng.hpp"

using namespace nertk;

namespace {

Sentence sentence_from(std::initializer_list<const char*> tags) {
  Sentence s;
  for (const char* t : tags) s.tokens.push_back({"w", parse_tag(t, TagScheme::IOB2)});
  return s;
}

Sentence sentence_with_spans(std::size_t length, const std::vector<EntitySpan>& spans) {
  Sentence s;
  for (const auto& tag : spans_to_tags(spans, length, TagScheme::IOB2)) s.tokens.push_back({"w", tag});
  return s;
}

Sentence random_sentence(Rng& rng, std::size_t length) {
  static const char* types[] = {"PER", "LOC", "ORG"};
  std::vector<EntitySpan> spans;
  std::size_t i = 0;
  while (i < length) {
    if (rng.uniform() < 0.5) {
      ++i;
      continue;
    }
    const std::size_t len = 1 + rng.below(std::min<std::size_t>(3, length - i));
    spans.push_back({i, i + len, types[rng.below(3)]});
    i += len;
  }
  return sentence_with_spans(length, spans);
}

}  // namespace

TEST_CASE("f1_from_pr") {
  CHECK(std::abs(f1_from_pr(91.42, 95.01) - 93.18) <= 0.005);
  CHECK(std::abs(f1_from_pr(72.92, 75.37) - 74.12) <= 0.005);
  CHECK(f1_from_pr(0.37, 0.37) == doctest::Approx(0.37));
  CHECK(f1_from_pr(0.0, 0.0) == 0.0);
  CHECK(f1_from_pr(0.2, 0.9) == f1_from_pr(0.9, 0.2));
}

TEST_CASE("conll_evaluate") {
  const Corpus gold{sentence_from({"B-PER", "I-PER", "O", "B-LOC"})};
  const Corpus pred{sentence_from({"B-PER", "I-PER", "O", "B-ORG"})};
  const auto r = conll_evaluate(gold, pred);
  CHECK(r.overall.true_positive == 1);
  CHECK(r.overall.false_positive == 1);
  CHECK(r.overall.false_negative == 1);
  const auto s = r.overall.scores();
  CHECK(s.precision == 0.5);
  CHECK(s.recall == 0.5);
  CHECK(s.f1 == 0.5);
  CHECK(r.per_type.at("LOC").false_negative == 1);
  CHECK(r.per_type.at("ORG").false_positive == 1);

  const auto self = conll_evaluate(gold, gold).overall.scores();
  CHECK(self.precision == 1.0);
  CHECK(self.recall == 1.0);
  CHECK(self.f1 == 1.0);

  const Corpus none{sentence_from({"O", "O", "O", "O"})};
  const auto empty = conll_evaluate(gold, none).overall.scores();
  CHECK(empty.precision == 0.0);
  CHECK(empty.recall == 0.0);
  CHECK(empty.f1 == 0.0);

  const Corpus shorter{sentence_from({"O", "O", "O"})};
  try {
    conll_evaluate(gold, shorter);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("sentence 0") != std::string::npos);
  }
  CHECK_THROWS_AS(conll_evaluate(gold, Corpus{}), Error);
}

TEST_CASE("MUC tally arithmetic") {
  MucTally t{3, 1, 1, 1, 1};
  CHECK(t.possible() == 6);
  CHECK(t.actual() == 6);
  const auto s = t.scores(true);
  CHECK(s.precision == doctest::Approx(3.5 / 6.0));
  CHECK(s.recall == doctest::Approx(3.5 / 6.0));
}

TEST_CASE("muc_evaluate categories") {
  // gold: (0,2,PER) (3,4,LOC) (5,7,ORG) (8,9,PER)
  // pred: (0,2,PER) (3,4,ORG) (5,6,ORG)            (10,11,LOC)
  const Corpus gold{sentence_with_spans(12, {{0, 2, "PER"}, {3, 4, "LOC"}, {5, 7, "ORG"}, {8, 9, "PER"}})};
  const Corpus pred{sentence_with_spans(12, {{0, 2, "PER"}, {3, 4, "ORG"}, {5, 6, "ORG"}, {10, 11, "LOC"}})};
  const auto r = muc_evaluate(gold, pred);
  CHECK(r.overall.correct == 1);
  CHECK(r.overall.incorrect == 1);
  CHECK(r.overall.partial == 1);
  CHECK(r.overall.missing == 1);
  CHECK(r.overall.spurious == 1);
  CHECK(r.per_type.at("LOC").incorrect == 1);
  CHECK(r.per_type.at("LOC").spurious == 1);
  CHECK(r.scores().precision == doctest::Approx(1.5 / 4.0));
  CHECK(r.scores().recall == doctest::Approx(1.5 / 4.0));

  const auto self = muc_evaluate(gold, gold);
  CHECK(self.overall.correct == 4);
  CHECK(self.scores().f1 == 1.0);

  const Corpus none{sentence_with_spans(12, {})};
  const auto empty = muc_evaluate(gold, none);
  CHECK(empty.overall.missing == 4);
  CHECK(empty.scores().recall == 0.0);
}

TEST_CASE("semeval_evaluate modes") {
  const Corpus gold{sentence_with_spans(8, {{0, 2, "ORG"}, {5, 6, "LOC"}})};
  const Corpus pred{sentence_with_spans(8, {{0, 2, "ORG"}, {5, 7, "LOC"}})};
  const auto r = semeval_evaluate(gold, pred);
  CHECK(r.strict.scores().precision == 0.5);
  CHECK(r.strict.scores().recall == 0.5);
  CHECK(r.exact.scores().precision == 0.5);
  CHECK(r.exact.scores().recall == 0.5);
  CHECK(r.partial.scores().precision == 0.75);
  CHECK(r.partial.scores().recall == 0.75);
  CHECK(r.type.scores().precision == 1.0);
  CHECK(r.type.scores().recall == 1.0);

  const auto self = semeval_evaluate(gold, gold);
  for (const auto* rep : {&self.strict, &self.exact, &self.partial, &self.type}) CHECK(rep->scores().f1 == 1.0);
}

TEST_CASE("match_spans ordering rules") {
  // Exact pair wins over an earlier overlapping candidate.
  const std::vector<EntitySpan> gold = {{0, 3, "PER"}};
  const std::vector<EntitySpan> pred = {{0, 2, "PER"}, {0, 3, "PER"}};
  CHECK(match_spans(gold, pred) == std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}});

  // Same bounds beat larger-overlap type matches.
  const std::vector<EntitySpan> g2 = {{0, 2, "LOC"}};
  const std::vector<EntitySpan> p2 = {{0, 2, "ORG"}};
  CHECK(match_spans(g2, p2).size() == 1);

  // One predicted span overlapping two gold spans pairs with the larger overlap.
  const std::vector<EntitySpan> g3 = {{0, 1, "LOC"}, {1, 4, "LOC"}};
  const std::vector<EntitySpan> p3 = {{0, 3, "LOC"}};
  CHECK(match_spans(g3, p3) == std::vector<std::pair<std::size_t, std::size_t>>{{1, 0}});

  // Equal overlaps: the earlier gold start wins.
  const std::vector<EntitySpan> g4 = {{0, 2, "LOC"}, {2, 4, "LOC"}};
  const std::vector<EntitySpan> p4 = {{1, 3, "LOC"}};
  CHECK(match_spans(g4, p4) == std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}});
}

TEST_CASE("metric invariants on random corpora") {
  Rng rng(55);
  for (int trial = 0; trial < 200; ++trial) {
    Corpus gold, pred;
    const std::size_t n = 1 + rng.below(5);
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t len = 1 + rng.below(10);
      gold.push_back(random_sentence(rng, len));
      pred.push_back(random_sentence(rng, len));
    }
    std::size_t gold_spans = 0, pred_spans = 0;
    for (std::size_t s = 0; s < n; ++s) {
      gold_spans += extract_spans(gold[s], TagScheme::IOB2).size();
      pred_spans += extract_spans(pred[s], TagScheme::IOB2).size();
    }
    const auto conll = conll_evaluate(gold, pred).overall.scores();
    const auto sem = semeval_evaluate(gold, pred);
    const auto muc = muc_evaluate(gold, pred);
    CHECK(muc.overall.possible() == gold_spans);
    CHECK(muc.overall.actual() == pred_spans);
    for (const auto* rep : {&sem.strict, &sem.exact, &sem.partial, &sem.type}) {
      CHECK(rep->overall.possible() == gold_spans);
      CHECK(rep->overall.actual() == pred_spans);
      const auto sc = rep->scores();
      CHECK(sc.precision >= 0.0);
      CHECK(sc.precision <= 1.0);
      CHECK(sc.recall >= 0.0);
      CHECK(sc.recall <= 1.0);
    }
    CHECK(sem.strict.scores().precision <= sem.exact.scores().precision + 1e-15);
    CHECK(sem.strict.scores().recall <= sem.exact.scores().recall + 1e-15);
    CHECK(conll.f1 <= sem.exact.scores().f1 + 1e-12);
    CHECK(sem.exact.scores().f1 <= sem.partial.scores().f1 + 1e-12);

    // Permuting sentences together changes nothing.
    Corpus g2 = gold, p2 = pred;
    std::reverse(g2.begin(), g2.end());
    std::reverse(p2.begin(), p2.end());
    const auto permuted = conll_evaluate(g2, p2).overall;
    CHECK(permuted.true_positive == conll_evaluate(gold, pred).overall.true_positive);
    CHECK(muc_evaluate(g2, p2).overall.partial == muc.overall.partial);

    if (gold_spans > 0) CHECK(conll_evaluate(gold, gold).overall.scores().f1 == 1.0);
  }
}

TEST_CASE("cohen_kappa") {
  AgreementTable t{{"A", "B"}, {{4, 1}, {1, 4}}};
  CHECK(t.observed() == doctest::Approx(0.8));
  CHECK(t.chance() == doctest::Approx(0.5));
  CHECK(cohen_kappa(t) == doctest::Approx(0.6).epsilon(1e-15));

  AgreementTable perfect{{"A", "B", "C"}, {{3, 0, 0}, {0, 2, 0}, {0, 0, 5}}};
  CHECK(cohen_kappa(perfect) == 1.0);

  AgreementTable empty{{"A", "B"}, {{0, 0}, {0, 0}}};
  CHECK_THROWS_AS(cohen_kappa(empty), Error);
  AgreementTable constant{{"O", "B"}, {{7, 0}, {0, 0}}};
  try {
    cohen_kappa(constant);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()) == "agreement by chance is total");
  }

  const Corpus a{sentence_from({"B-PER", "O", "B-LOC", "O"})};
  const Corpus b{sentence_from({"B-PER", "O", "B-ORG", "O"})};
  const auto table = AgreementTable::from_corpora(a, b, TagScheme::IOB2);
  CHECK(table.total() == 4.0);
  CHECK(table.observed() == 0.75);
  CHECK(cohen_kappa(AgreementTable::from_corpora(a, a, TagScheme::IOB2)) == 1.0);
}

TEST_CASE("interpret_kappa bands") {
  CHECK(interpret_kappa(0.7321) == "Substantial agreement");
  CHECK(interpret_kappa(1.0) == "Perfect agreement");
  CHECK(interpret_kappa(0.0) == "Agreement equivalent to chance");
  CHECK(interpret_kappa(-0.3) == "Agreement equivalent to chance");
  CHECK(interpret_kappa(0.05) == "Slight agreement");
  CHECK(interpret_kappa(0.20) == "Slight agreement");
  CHECK(interpret_kappa(0.21) == "Fair agreement");
  CHECK(interpret_kappa(0.40) == "Fair agreement");
  CHECK(interpret_kappa(0.41) == "Moderate agreement");
  CHECK(interpret_kappa(0.60) == "Moderate agreement");
  CHECK(interpret_kappa(0.61) == "Substantial agreement");
  CHECK(interpret_kappa(0.80) == "Substantial agreement");
  CHECK(interpret_kappa(0.81) == "Near perfect agreement");
  CHECK(interpret_kappa(0.99) == "Near perfect agreement");
}

TEST_CASE("report writers") {
  const Corpus gold{sentence_from({"B-PER", "I-PER", "O", "B-LOC"})};
  std::ostringstream text, kv;
  write_conll_text(text, conll_evaluate(gold, gold));
  CHECK(text.str().find("100.00") != std::string::npos);
  write_conll_kv(kv, conll_evaluate(gold, gold));
  CHECK(kv.str().find("overall.f1=1.000000") != std::string::npos);
  std::ostringstream muc;
  write_category_kv(muc, muc_evaluate(gold, gold));
  CHECK(muc.str().find("muc.overall.cor=2") != std::string::npos);
}
