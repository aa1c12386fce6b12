#pragma once

#include <cstddef>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nertk/corpus.hpp"

namespace nertk {

/// Scores are ratios in [0, 1]; a zero denominator yields 0.
struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Harmonic mean of precision and recall in whatever unit they are given;
/// 0 when both are 0.
double f1_from_pr(double precision, double recall);

// --- CoNLL exact-match -----------------------------------------------------------

struct ConllTally {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;

  Scores scores() const;
  ConllTally& operator+=(const ConllTally& o);
};

struct ConllReport {
  std::map<std::string, ConllTally> per_type;
  ConllTally overall;
};

ConllReport conll_evaluate(const Corpus& gold, const Corpus& pred, TagScheme scheme = TagScheme::IOB2);

// --- MUC / SemEval categories ------------------------------------------------------

struct MucTally {
  std::size_t correct = 0;
  std::size_t incorrect = 0;
  std::size_t partial = 0;
  std::size_t missing = 0;
  std::size_t spurious = 0;

  std::size_t possible() const { return correct + incorrect + partial + missing; }
  std::size_t actual() const { return correct + incorrect + partial + spurious; }
  /// With partial credit, PAR counts half toward both precision and recall.
  Scores scores(bool partial_credit) const;
  MucTally& operator+=(const MucTally& o);
};

/// One-to-one pairing of gold and predicted spans within a sentence: exact
/// (boundary and type) pairs first, then exact-boundary pairs, then pairs of
/// largest overlap, overlap ties going to the earlier gold start.
std::vector<std::pair<std::size_t, std::size_t>> match_spans(const std::vector<EntitySpan>& gold,
                                                             const std::vector<EntitySpan>& pred);

enum class MatchMode { Muc, Strict, Exact, Partial, Type };

std::string_view match_mode_name(MatchMode mode);

struct CategoryReport {
  MatchMode mode = MatchMode::Muc;
  std::map<std::string, MucTally> per_type;  ///< gold type; spurious by predicted type
  MucTally overall;

  bool partial_credit() const;
  Scores scores() const { return overall.scores(partial_credit()); }
};

CategoryReport category_evaluate(const Corpus& gold, const Corpus& pred, MatchMode mode,
                                 TagScheme scheme = TagScheme::IOB2);

inline CategoryReport muc_evaluate(const Corpus& gold, const Corpus& pred,
                                   TagScheme scheme = TagScheme::IOB2) {
  return category_evaluate(gold, pred, MatchMode::Muc, scheme);
}

struct SemevalReport {
  CategoryReport strict, exact, partial, type;
};

SemevalReport semeval_evaluate(const Corpus& gold, const Corpus& pred, TagScheme scheme = TagScheme::IOB2);

// --- inter-annotator agreement -------------------------------------------------------

struct AgreementTable {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> counts;  ///< [first annotator][second annotator]

  static AgreementTable from_corpora(const Corpus& first, const Corpus& second, TagScheme scheme);

  double total() const;
  double observed() const;  ///< p_o
  double chance() const;    ///< p_e
};

double cohen_kappa(const AgreementTable& table);

/// Band label for a kappa value.
std::string_view interpret_kappa(double kappa);

// --- reports -----------------------------------------------------------------------

void write_conll_text(std::ostream& os, const ConllReport& report);
void write_conll_kv(std::ostream& os, const ConllReport& report);
void write_category_text(std::ostream& os, const CategoryReport& report);
void write_category_kv(std::ostream& os, const CategoryReport& report);

}  // namespace nertk
