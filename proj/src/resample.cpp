#include "nertk/resample.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "nertk/error.hpp"
#include "nertk/rng.hpp"

namespace nertk {

// --- feature-row files ---------------------------------------------------------

FeatureSet FeatureSet::parse(std::istream& in) {
  FeatureSet set;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (!have_header) {
      std::istringstream header(line);
      long long width = 0;
      std::string rest;
      if (!(header >> width) || width <= 0 || (header >> rest)) {
        throw Error("header must be a single positive attribute count", line_no);
      }
      set.numattr = static_cast<std::size_t>(width);
      have_header = true;
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) throw Error("expected `label<TAB>values`", line_no);
    FeatureRow row;
    row.label = line.substr(0, tab);
    std::istringstream values(line.substr(tab + 1));
    std::string field;
    while (values >> field) {
      double v = 0;
      try {
        std::size_t used = 0;
        v = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw Error("non-numeric value '" + field + "'", line_no);
      }
      if (!std::isfinite(v)) throw Error("non-finite value '" + field + "'", line_no);
      row.values.push_back(v);
    }
    if (row.values.size() != set.numattr) {
      throw Error("expected " + std::to_string(set.numattr) + " values, found " +
                      std::to_string(row.values.size()),
                  line_no);
    }
    set.rows.push_back(std::move(row));
  }
  if (!have_header) throw Error("feature file has no header line");
  return set;
}

FeatureSet FeatureSet::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open feature file '" + path + "'");
  try {
    return parse(in);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

void FeatureSet::write(std::ostream& os) const {
  os << numattr << "\n";
  os << std::setprecision(17);
  for (const auto& row : rows) {
    os << row.label << '\t';
    for (std::size_t a = 0; a < row.values.size(); ++a) {
      if (a) os << ' ';
      os << row.values[a];
    }
    os << "\n";
  }
}

void FeatureSet::save_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write feature file '" + path + "'");
  write(out);
}

// --- SMOTE -------------------------------------------------------------------

namespace {

double squared_distance(const FeatureRow& a, const FeatureRow& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double diff = a.values[i] - b.values[i];
    d += diff * diff;
  }
  return d;
}

void check_widths(std::span<const FeatureRow> rows) {
  if (rows.empty()) return;
  const std::size_t width = rows.front().values.size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].values.size() != width) {
      throw Error("feature row " + std::to_string(i) + " has width " +
                  std::to_string(rows[i].values.size()) + ", expected " + std::to_string(width));
    }
  }
}

}  // namespace

std::vector<std::size_t> knn_minority(std::span<const FeatureRow> rows, std::size_t i,
                                      std::size_t k) {
  if (i >= rows.size()) throw Error("sample index out of range");
  if (k == 0 || k >= rows.size()) {
    throw Error("k = " + std::to_string(k) + " requires at least k + 1 minority samples, have " +
                std::to_string(rows.size()));
  }
  check_widths(rows);
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(rows.size() - 1);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (j != i) dist.emplace_back(squared_distance(rows[i], rows[j]), j);
  }
  std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k), dist.end());
  std::vector<std::size_t> out(k);
  for (std::size_t n = 0; n < k; ++n) out[n] = dist[n].second;
  return out;
}

FeatureRow populate_synthetic(const FeatureRow& sample, const FeatureRow& neighbor, double gap) {
  if (sample.values.size() != neighbor.values.size()) {
    throw Error("sample and neighbour widths differ");
  }
  FeatureRow out;
  out.label = sample.label;
  out.values.resize(sample.values.size());
  for (std::size_t a = 0; a < sample.values.size(); ++a) {
    const double dif = neighbor.values[a] - sample.values[a];
    out.values[a] = sample.values[a] + gap * dif;
  }
  return out;
}

std::size_t smote_output_count(std::size_t minority_count, int n_percent) {
  if (n_percent <= 0) return 0;
  if (n_percent < 100) {
    return static_cast<std::size_t>(n_percent) * minority_count / 100;
  }
  return static_cast<std::size_t>(n_percent / 100) * minority_count;
}

SyntheticSet smote(std::span<const FeatureRow> minority, const SmoteConfig& config) {
  if (minority.empty()) throw Error("SMOTE needs at least one minority sample");
  if (config.n_percent <= 0) throw Error("amount of SMOTE must be positive");
  if (config.k == 0) throw Error("k must be at least 1");
  check_widths(minority);
  for (const auto& row : minority) {
    if (row.label != minority.front().label) {
      throw Error("minority rows carry different labels ('" + minority.front().label + "', '" +
                  row.label + "')");
    }
  }

  Rng rng(config.seed);
  std::vector<std::size_t> selected(minority.size());
  std::iota(selected.begin(), selected.end(), 0);
  int n = config.n_percent;
  if (n < 100) {
    rng.shuffle(selected);
    selected.resize(static_cast<std::size_t>(n) * minority.size() / 100);
    std::sort(selected.begin(), selected.end());
    n = 100;
  }
  const std::size_t per_sample = static_cast<std::size_t>(n / 100);
  if (config.k >= selected.size()) {
    throw Error("k = " + std::to_string(config.k) + " requires more than k samples, have " +
                std::to_string(selected.size()) + " after selection");
  }

  std::vector<FeatureRow> pool;
  pool.reserve(selected.size());
  for (auto idx : selected) pool.push_back(minority[idx]);

  SyntheticSet out;
  out.rows.reserve(per_sample * pool.size());
  out.provenance.reserve(per_sample * pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto neighbors = knn_minority(pool, i, config.k);
    for (std::size_t r = 0; r < per_sample; ++r) {
      const std::size_t nn = neighbors[rng.below(neighbors.size())];
      const double gap = rng.uniform();
      out.rows.push_back(populate_synthetic(pool[i], pool[nn], gap));
      out.provenance.push_back({selected[i], selected[nn], gap});
    }
  }
  return out;
}

// --- dataset balancing ---------------------------------------------------------

BalanceTarget BalanceTarget::parse(const std::string& text) {
  BalanceTarget target;
  if (text == "match-majority") {
    target.match_majority = true;
    return target;
  }
  const auto parse_count = [&](const std::string& s) {
    std::size_t used = 0;
    long long v = -1;
    try {
      v = std::stoll(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || v < 0) throw Error("invalid target count '" + s + "'");
    return static_cast<std::size_t>(v);
  };
  if (text.find('=') == std::string::npos) {
    target.all = parse_count(text);
    return target;
  }
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw Error("invalid target entry '" + item + "'");
    target.per_class[item.substr(0, eq)] = parse_count(item.substr(eq + 1));
  }
  return target;
}

std::optional<std::size_t> BalanceTarget::for_class(const std::string& label,
                                                    std::size_t majority) const {
  if (auto it = per_class.find(label); it != per_class.end()) return it->second;
  if (all) return all;
  if (match_majority) return majority;
  return std::nullopt;
}

std::vector<FeatureRow> balance_token_dataset(std::span<const FeatureRow> rows,
                                              const BalanceTarget& target,
                                              const SmoteConfig& config) {
  check_widths(rows);
  std::map<std::string, std::vector<FeatureRow>> classes;
  for (const auto& row : rows) classes[row.label].push_back(row);
  std::size_t majority = 0;
  for (const auto& [label, members] : classes) majority = std::max(majority, members.size());

  Rng rng(config.seed);
  std::vector<FeatureRow> out;
  out.reserve(rows.size());
  for (auto& [label, members] : classes) {
    const std::size_t count = members.size();
    const auto wanted = target.for_class(label, majority);
    const std::uint64_t class_seed = rng.next();
    if (!wanted || *wanted == count) {
      out.insert(out.end(), members.begin(), members.end());
      continue;
    }
    if (*wanted < count) {
      Rng sub(class_seed);
      sub.shuffle(members);
      members.resize(*wanted);
      out.insert(out.end(), members.begin(), members.end());
      continue;
    }
    if (count < config.k + 1) {
      throw Error("class '" + label + "' has " + std::to_string(count) +
                  " rows; SMOTE with k = " + std::to_string(config.k) + " needs at least " +
                  std::to_string(config.k + 1));
    }
    const std::size_t missing = *wanted - count;
    const std::size_t multiples = (missing + count - 1) / count;
    SmoteConfig class_config = config;
    class_config.n_percent = static_cast<int>(multiples * 100);
    class_config.seed = class_seed;
    SyntheticSet synthetic = smote(members, class_config);
    Rng trim(derive_seed(class_seed, 1));
    trim.shuffle(synthetic.rows);
    synthetic.rows.resize(missing);
    out.insert(out.end(), members.begin(), members.end());
    out.insert(out.end(), synthetic.rows.begin(), synthetic.rows.end());
  }
  Rng order(derive_seed(config.seed, 2));
  order.shuffle(out);
  return out;
}

Corpus oversample_entity_sentences(const Corpus& corpus, std::uint64_t seed) {
  std::map<std::string, std::size_t> counts;
  std::map<std::string, std::vector<std::size_t>> carriers;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    std::map<std::string, std::size_t> local;
    for (const auto& token : corpus[s].tokens) {
      if (!token.tag.is_outside()) ++local[token.tag.type];
    }
    for (const auto& [type, n] : local) {
      counts[type] += n;
      carriers[type].push_back(s);
    }
  }
  std::size_t majority = 0;
  for (const auto& [type, n] : counts) majority = std::max(majority, n);

  Corpus out = corpus;
  Rng rng(seed);
  for (const auto& [type, pool] : carriers) {
    std::size_t have = counts[type];
    while (have < majority) {
      const Sentence& pick = corpus[pool[rng.below(pool.size())]];
      for (const auto& token : pick.tokens) {
        if (!token.tag.is_outside()) ++counts[token.tag.type];
      }
      have = counts[type];
      out.push_back(pick);
    }
  }
  return out;
}

}  // namespace nertk
