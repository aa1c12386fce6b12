#include "nertk/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <set>

#include "nertk/error.hpp"

namespace nertk {

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

void check_aligned(const Corpus& gold, const Corpus& pred) {
  const std::size_t n = std::min(gold.size(), pred.size());
  for (std::size_t s = 0; s < n; ++s) {
    if (gold[s].size() != pred[s].size()) {
      throw Error("sentence " + std::to_string(s) + " has " + std::to_string(gold[s].size()) +
                  " gold tokens but " + std::to_string(pred[s].size()) + " predicted tokens");
    }
  }
  if (gold.size() != pred.size()) {
    throw Error("sentence " + std::to_string(n) + ": corpora differ in length (" +
                std::to_string(gold.size()) + " gold vs " + std::to_string(pred.size()) + " predicted)");
  }
}

std::vector<EntitySpan> spans_of(const Sentence& s, TagScheme scheme, std::size_t index, const char* side) {
  try {
    return extract_spans(s, scheme);
  } catch (const Error& e) {
    throw Error(std::string(side) + " sentence " + std::to_string(index) + ": " + e.what());
  }
}

std::size_t overlap(const EntitySpan& a, const EntitySpan& b) {
  const std::size_t lo = std::max(a.start, b.start);
  const std::size_t hi = std::min(a.end, b.end);
  return hi > lo ? hi - lo : 0;
}

bool same_bounds(const EntitySpan& a, const EntitySpan& b) { return a.start == b.start && a.end == b.end; }

}  // namespace

double f1_from_pr(double precision, double recall) {
  const double sum = precision + recall;
  return sum == 0.0 ? 0.0 : 2.0 * precision * recall / sum;
}

// --- CoNLL -------------------------------------------------------------------------

Scores ConllTally::scores() const {
  Scores s;
  s.precision = ratio(static_cast<double>(true_positive), static_cast<double>(true_positive + false_positive));
  s.recall = ratio(static_cast<double>(true_positive), static_cast<double>(true_positive + false_negative));
  s.f1 = f1_from_pr(s.precision, s.recall);
  return s;
}

ConllTally& ConllTally::operator+=(const ConllTally& o) {
  true_positive += o.true_positive;
  false_positive += o.false_positive;
  false_negative += o.false_negative;
  return *this;
}

ConllReport conll_evaluate(const Corpus& gold, const Corpus& pred, TagScheme scheme) {
  check_aligned(gold, pred);
  ConllReport report;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const auto g = spans_of(gold[s], scheme, s, "gold");
    const auto p = spans_of(pred[s], scheme, s, "predicted");
    const std::set<EntitySpan> gold_set(g.begin(), g.end());
    const std::set<EntitySpan> pred_set(p.begin(), p.end());
    for (const auto& span : p) {
      auto& tally = report.per_type[span.type];
      if (gold_set.count(span)) {
        ++tally.true_positive;
      } else {
        ++tally.false_positive;
      }
    }
    for (const auto& span : g) {
      if (!pred_set.count(span)) ++report.per_type[span.type].false_negative;
    }
  }
  for (const auto& [type, tally] : report.per_type) report.overall += tally;
  return report;
}

// --- MUC / SemEval ---------------------------------------------------------------------

Scores MucTally::scores(bool partial_credit) const {
  const double credit = static_cast<double>(correct) + (partial_credit ? 0.5 * static_cast<double>(partial) : 0.0);
  Scores s;
  s.precision = ratio(credit, static_cast<double>(actual()));
  s.recall = ratio(credit, static_cast<double>(possible()));
  s.f1 = f1_from_pr(s.precision, s.recall);
  return s;
}

MucTally& MucTally::operator+=(const MucTally& o) {
  correct += o.correct;
  incorrect += o.incorrect;
  partial += o.partial;
  missing += o.missing;
  spurious += o.spurious;
  return *this;
}

std::vector<std::pair<std::size_t, std::size_t>> match_spans(const std::vector<EntitySpan>& gold,
                                                             const std::vector<EntitySpan>& pred) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<char> gold_used(gold.size(), 0), pred_used(pred.size(), 0);
  const auto link = [&](std::size_t g, std::size_t p) {
    gold_used[g] = pred_used[p] = 1;
    pairs.emplace_back(g, p);
  };

  for (std::size_t g = 0; g < gold.size(); ++g) {
    for (std::size_t p = 0; p < pred.size(); ++p) {
      if (!pred_used[p] && gold[g] == pred[p]) {
        link(g, p);
        break;
      }
    }
  }
  for (std::size_t g = 0; g < gold.size(); ++g) {
    if (gold_used[g]) continue;
    for (std::size_t p = 0; p < pred.size(); ++p) {
      if (!pred_used[p] && same_bounds(gold[g], pred[p])) {
        link(g, p);
        break;
      }
    }
  }
  for (;;) {
    std::size_t best = 0, bg = 0, bp = 0;
    for (std::size_t g = 0; g < gold.size(); ++g) {
      if (gold_used[g]) continue;
      for (std::size_t p = 0; p < pred.size(); ++p) {
        if (pred_used[p]) continue;
        const std::size_t ov = overlap(gold[g], pred[p]);
        const bool better = ov > best ||
                            (ov == best && ov > 0 &&
                             (gold[g].start < gold[bg].start ||
                              (gold[g].start == gold[bg].start && pred[p].start < pred[bp].start)));
        if (better) {
          best = ov;
          bg = g;
          bp = p;
        }
      }
    }
    if (best == 0) break;
    link(bg, bp);
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

std::string_view match_mode_name(MatchMode mode) {
  switch (mode) {
    case MatchMode::Muc: return "muc";
    case MatchMode::Strict: return "strict";
    case MatchMode::Exact: return "exact";
    case MatchMode::Partial: return "partial";
    case MatchMode::Type: return "type";
  }
  return "?";
}

bool CategoryReport::partial_credit() const {
  return mode == MatchMode::Muc || mode == MatchMode::Partial || mode == MatchMode::Type;
}

namespace {

enum class Category { Correct, Incorrect, Partial };

Category classify(MatchMode mode, const EntitySpan& g, const EntitySpan& p) {
  const bool bounds = same_bounds(g, p);
  const bool type = g.type == p.type;
  switch (mode) {
    case MatchMode::Muc:
      if (bounds) return type ? Category::Correct : Category::Incorrect;
      return Category::Partial;
    case MatchMode::Strict: return bounds && type ? Category::Correct : Category::Incorrect;
    case MatchMode::Exact: return bounds ? Category::Correct : Category::Incorrect;
    case MatchMode::Partial: return bounds ? Category::Correct : Category::Partial;
    case MatchMode::Type: return type ? Category::Correct : Category::Incorrect;
  }
  return Category::Incorrect;
}

}  // namespace

CategoryReport category_evaluate(const Corpus& gold, const Corpus& pred, MatchMode mode, TagScheme scheme) {
  check_aligned(gold, pred);
  CategoryReport report;
  report.mode = mode;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const auto g = spans_of(gold[s], scheme, s, "gold");
    const auto p = spans_of(pred[s], scheme, s, "predicted");
    const auto pairs = match_spans(g, p);
    std::vector<char> gold_seen(g.size(), 0), pred_seen(p.size(), 0);
    for (const auto& [gi, pi] : pairs) {
      gold_seen[gi] = pred_seen[pi] = 1;
      auto& tally = report.per_type[g[gi].type];
      switch (classify(mode, g[gi], p[pi])) {
        case Category::Correct: ++tally.correct; break;
        case Category::Incorrect: ++tally.incorrect; break;
        case Category::Partial: ++tally.partial; break;
      }
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!gold_seen[i]) ++report.per_type[g[i].type].missing;
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!pred_seen[i]) ++report.per_type[p[i].type].spurious;
    }
  }
  for (const auto& [type, tally] : report.per_type) report.overall += tally;
  return report;
}

SemevalReport semeval_evaluate(const Corpus& gold, const Corpus& pred, TagScheme scheme) {
  return {category_evaluate(gold, pred, MatchMode::Strict, scheme),
          category_evaluate(gold, pred, MatchMode::Exact, scheme),
          category_evaluate(gold, pred, MatchMode::Partial, scheme),
          category_evaluate(gold, pred, MatchMode::Type, scheme)};
}

// --- kappa ---------------------------------------------------------------------------

AgreementTable AgreementTable::from_corpora(const Corpus& first, const Corpus& second, TagScheme scheme) {
  check_aligned(first, second);
  std::set<std::string> label_set;
  for (const Corpus* c : {&first, &second}) {
    for (const auto& s : *c) {
      for (const auto& t : s.tokens) label_set.insert(format_tag(t.tag, scheme));
    }
  }
  AgreementTable table;
  table.labels.assign(label_set.begin(), label_set.end());
  const auto index = [&](const Tag& tag) {
    const auto name = format_tag(tag, scheme);
    return static_cast<std::size_t>(std::lower_bound(table.labels.begin(), table.labels.end(), name) -
                                    table.labels.begin());
  };
  table.counts.assign(table.labels.size(), std::vector<double>(table.labels.size(), 0.0));
  for (std::size_t s = 0; s < first.size(); ++s) {
    for (std::size_t t = 0; t < first[s].size(); ++t) {
      table.counts[index(first[s].tokens[t].tag)][index(second[s].tokens[t].tag)] += 1.0;
    }
  }
  return table;
}

double AgreementTable::total() const {
  double n = 0.0;
  for (const auto& row : counts) {
    for (double c : row) n += c;
  }
  return n;
}

double AgreementTable::observed() const {
  const double n = total();
  double diag = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) diag += counts[i][i];
  return ratio(diag, n);
}

double AgreementTable::chance() const {
  const double n = total();
  if (n == 0.0) return 0.0;
  double pe = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    double row = 0.0, col = 0.0;
    for (std::size_t j = 0; j < counts.size(); ++j) {
      row += counts[i][j];
      col += counts[j][i];
    }
    pe += (row / n) * (col / n);
  }
  return pe;
}

double cohen_kappa(const AgreementTable& table) {
  for (const auto& row : table.counts) {
    if (row.size() != table.counts.size()) throw Error("agreement table is not square");
    for (double c : row) {
      if (c < 0) throw Error("agreement table has a negative count");
    }
  }
  if (table.total() < 1.0) throw Error("agreement table is empty");
  const double pe = table.chance();
  if (pe >= 1.0) throw Error("agreement by chance is total");
  return (table.observed() - pe) / (1.0 - pe);
}

std::string_view interpret_kappa(double kappa) {
  if (kappa <= 0.0) return "Agreement equivalent to chance";
  if (kappa < 0.21) return "Slight agreement";
  if (kappa < 0.41) return "Fair agreement";
  if (kappa < 0.61) return "Moderate agreement";
  if (kappa < 0.81) return "Substantial agreement";
  if (kappa < 1.0) return "Near perfect agreement";
  return "Perfect agreement";
}

// --- reports -------------------------------------------------------------------------

namespace {

void score_columns(std::ostream& os, const Scores& s) {
  os << std::fixed << std::setprecision(2) << std::setw(10) << 100.0 * s.precision << std::setw(10)
     << 100.0 * s.recall << std::setw(10) << 100.0 * s.f1;
}

void score_kv(std::ostream& os, const std::string& prefix, const Scores& s) {
  os << std::fixed << std::setprecision(6);
  os << prefix << ".precision=" << s.precision << "\n";
  os << prefix << ".recall=" << s.recall << "\n";
  os << prefix << ".f1=" << s.f1 << "\n";
}

}  // namespace

void write_conll_text(std::ostream& os, const ConllReport& report) {
  os << std::left << std::setw(12) << "type" << std::right << std::setw(8) << "TP" << std::setw(8) << "FP"
     << std::setw(8) << "FN" << std::setw(10) << "P" << std::setw(10) << "R" << std::setw(10) << "F1" << "\n";
  const auto row = [&](const std::string& name, const ConllTally& t) {
    os << std::left << std::setw(12) << name << std::right << std::setw(8) << t.true_positive << std::setw(8)
       << t.false_positive << std::setw(8) << t.false_negative;
    score_columns(os, t.scores());
    os << "\n";
  };
  for (const auto& [type, tally] : report.per_type) row(type, tally);
  row("overall", report.overall);
}

void write_conll_kv(std::ostream& os, const ConllReport& report) {
  os << "metric=conll\n";
  const auto block = [&](const std::string& prefix, const ConllTally& t) {
    os << prefix << ".tp=" << t.true_positive << "\n" << prefix << ".fp=" << t.false_positive << "\n"
       << prefix << ".fn=" << t.false_negative << "\n";
    score_kv(os, prefix, t.scores());
  };
  for (const auto& [type, tally] : report.per_type) block("type." + type, tally);
  block("overall", report.overall);
}

void write_category_text(std::ostream& os, const CategoryReport& report) {
  os << "mode: " << match_mode_name(report.mode) << "\n";
  os << std::left << std::setw(12) << "type" << std::right;
  for (const char* h : {"COR", "INC", "PAR", "MIS", "SPU", "POS", "ACT"}) os << std::setw(7) << h;
  os << std::setw(10) << "P" << std::setw(10) << "R" << std::setw(10) << "F1" << "\n";
  const auto row = [&](const std::string& name, const MucTally& t) {
    os << std::left << std::setw(12) << name << std::right;
    for (std::size_t v : {t.correct, t.incorrect, t.partial, t.missing, t.spurious, t.possible(), t.actual()}) {
      os << std::setw(7) << v;
    }
    score_columns(os, t.scores(report.partial_credit()));
    os << "\n";
  };
  for (const auto& [type, tally] : report.per_type) row(type, tally);
  row("overall", report.overall);
}

void write_category_kv(std::ostream& os, const CategoryReport& report) {
  const std::string mode(match_mode_name(report.mode));
  const auto block = [&](const std::string& prefix, const MucTally& t) {
    os << prefix << ".cor=" << t.correct << "\n" << prefix << ".inc=" << t.incorrect << "\n"
       << prefix << ".par=" << t.partial << "\n" << prefix << ".mis=" << t.missing << "\n"
       << prefix << ".spu=" << t.spurious << "\n" << prefix << ".pos=" << t.possible() << "\n"
       << prefix << ".act=" << t.actual() << "\n";
    score_kv(os, prefix, t.scores(report.partial_credit()));
  };
  for (const auto& [type, tally] : report.per_type) block(mode + ".type." + type, tally);
  block(mode + ".overall", report.overall);
}

}  // namespace nertk
