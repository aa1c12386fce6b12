#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "nertk/corpus.hpp"

namespace nertk {

/// A labeled fixed-width numeric vector; the label is an entity type or "O".
struct FeatureRow {
  std::vector<double> values;
  std::string label;

  friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

/// Feature-row file: a header line holding the width, then one
/// `label<TAB>v1 v2 ... vn` line per row.
struct FeatureSet {
  std::size_t numattr = 0;
  std::vector<FeatureRow> rows;

  static FeatureSet parse(std::istream& in);
  static FeatureSet load_file(const std::string& path);
  void write(std::ostream& os) const;
  void save_file(const std::string& path) const;
};

struct SmoteConfig {
  int n_percent = 100;  ///< amount of SMOTE in percent
  std::size_t k = 5;    ///< nearest neighbours considered per sample
  std::uint64_t seed = 0;
};

/// Which sample and neighbour produced a synthetic row, and the gap used.
/// Indices refer to the minority list handed to smote().
struct Provenance {
  std::size_t sample = 0;
  std::size_t neighbor = 0;
  double gap = 0.0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct SyntheticSet {
  std::vector<FeatureRow> rows;
  std::vector<Provenance> provenance;
};

/// The k rows nearest (Euclidean) to rows[i], excluding i itself. Ties go to
/// the lower index.
std::vector<std::size_t> knn_minority(std::span<const FeatureRow> rows, std::size_t i,
                                      std::size_t k);

/// sample + gap * (neighbor - sample), attribute-wise.
FeatureRow populate_synthetic(const FeatureRow& sample, const FeatureRow& neighbor, double gap);

/// Number of synthetic rows smote() emits for T minority rows at N percent.
std::size_t smote_output_count(std::size_t minority_count, int n_percent);

/// SMOTE over one minority class. For N < 100 a random floor(N/100 * T)
/// subset is oversampled once each; otherwise every row yields floor(N/100)
/// synthetic rows. Per synthetic row the generator draws the neighbour slot,
/// then the gap in [0, 1).
SyntheticSet smote(std::span<const FeatureRow> minority, const SmoteConfig& config);

struct BalanceTarget {
  bool match_majority = false;
  std::optional<std::size_t> all;                ///< same count for every class
  std::map<std::string, std::size_t> per_class;  ///< overrides `all`

  static BalanceTarget parse(const std::string& text);
  std::optional<std::size_t> for_class(const std::string& label, std::size_t majority) const;
};

/// Brings every targeted class to exactly its target count: SMOTE with the
/// smallest sufficient multiple of 100 percent, then uniform truncation, or
/// uniform under-sampling for classes above target. Output order is a
/// seeded shuffle.
std::vector<FeatureRow> balance_token_dataset(std::span<const FeatureRow> rows,
                                              const BalanceTarget& target,
                                              const SmoteConfig& config);

/// Sentence-level oversampling: sentences that contain an entity type are
/// duplicated (uniformly, with replacement) until that type's token count
/// reaches the count of the most frequent entity type.
Corpus oversample_entity_sentences(const Corpus& corpus, std::uint64_t seed);

}  // namespace nertk
