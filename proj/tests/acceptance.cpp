// Acceptance run: one PASS/FAIL line per criterion. Criteria 1-9 gate the
// exit status; criterion 10 (full-corpus reproduction) is informational and
// only checks corpus statistics when NERTK_ANEC_CORPUS points at the corpus.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <tuple>

#include <unistd.h>

#include "fixtures.hpp"
#include "nertk/config.hpp"
#include "nertk/crf.hpp"
#include "nertk/metrics.hpp"
#include "nertk/resample.hpp"
#include "nertk/train.hpp"
#include "oracles.hpp"

using namespace nertk;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

// --- 1 and 2: CRF oracles --------------------------------------------------------

std::vector<oracle::Instance> crf_instances() {
  Rng rng(20240101);
  std::vector<oracle::Instance> out;
  for (int i = 0; i < 500; ++i) {
    const std::size_t L = 1 + rng.below(4);
    const std::size_t K = 1 + rng.below(5);
    out.push_back(oracle::random_instance(rng, L, K));
  }
  return out;
}

Outcome partition_oracle() {
  const auto start = Clock::now();
  double worst = 0.0;
  for (const auto& inst : crf_instances()) {
    const double z = forward_log_partition(oracle::to_params(inst), inst.emissions);
    worst = std::max(worst, std::abs(z - oracle::brute_log_partition(inst)));
  }
  const double t = seconds_since(start);
  return {worst <= 1e-8 && t <= 10.0,
          "500 instances, max abs error " + fmt("%.2e", worst) + ", " + fmt("%.2f", t) + " s"};
}

Outcome viterbi_oracle() {
  const auto start = Clock::now();
  std::size_t mismatches = 0;
  for (const auto& inst : crf_instances()) {
    const auto v = viterbi_decode(oracle::to_params(inst), inst.emissions);
    const auto best = oracle::brute_viterbi(inst);
    if (v.tags != best.path || std::abs(v.score - best.score) > 1e-9) ++mismatches;
  }
  const double t = seconds_since(start);
  return {mismatches == 0 && t <= 10.0,
          "500 instances, " + std::to_string(mismatches) + " mismatches, " + fmt("%.2f", t) + " s"};
}

// --- 3: gradient suite -------------------------------------------------------------

Outcome gradient_suite() {
  const auto start = Clock::now();
  Rng rng(777);
  double worst = 0.0;
  std::string worst_tensor;
  for (int m = 0; m < 20; ++m) {
    // One entity type keeps K = 3; sentences have at most three tokens.
    const Corpus corpus = parse_corpus(
        "ab\tB-PER\nc\tI-PER\nd\tO\n\nd\tO\nab\tB-PER\n\nc\tB-PER\n\n", TagScheme::IOB2);
    ModelDims dims;
    dims.char_dim = 1 + rng.below(4);
    dims.char_hidden = 1 + rng.below(3);
    dims.word_dim = 1 + rng.below(4);
    dims.word_hidden = 1 + rng.below(3);
    const double dropout = m % 2 == 0 ? 0.0 : 0.5;
    Model model = init_model(corpus, dims, dropout, rng.next());
    for (auto& t : tensors(model.params)) {
      for (Eigen::Index i = 0; i < t.data.size(); ++i) t.data.data()[i] = rng.uniform(-1.0, 1.0);
    }
    GradCheckOptions options;
    options.seed = rng.next();
    options.masked = m % 4 == 3;
    const auto report = gradient_check(model, corpus[static_cast<std::size_t>(m) % corpus.size()], options);
    for (const auto& t : report.tensors) {
      if (t.max_relative_error >= worst) {
        worst = t.max_relative_error;
        worst_tensor = t.name;
      }
    }
  }
  const double t = seconds_since(start);
  return {worst <= 1e-4 && t <= 120.0, "20 models, max relative error " + fmt("%.2e", worst) + " (" + worst_tensor +
                                           "), " + fmt("%.2f", t) + " s"};
}

// --- 4: overfit oracle -------------------------------------------------------------

Outcome overfit_oracle() {
  const auto start = Clock::now();
  const Corpus corpus = fixture::synthetic_corpus(20, 50, 4);
  TrainConfig config;
  config.learning_rate = 0.001;
  config.batch_size = 20;
  config.max_epochs = 200;
  config.dropout = 0.0;
  config.seed = 4;
  Model model = init_model(corpus, config.dims, config.dropout, config.seed);
  std::size_t reached = 0;
  TrainCallbacks cb;
  cb.dev = &corpus;
  cb.on_epoch = [&](const EpochLog& log) {
    if (!reached && log.dev_f1 && *log.dev_f1 == 1.0) reached = log.epoch;
  };
  train_model(model, corpus, config, cb);
  const double f1 = conll_evaluate(corpus, tag_corpus(model, corpus)).overall.scores().f1;
  const double t = seconds_since(start);
  const std::string when = reached ? "first 100.00 at epoch " + std::to_string(reached) : "never reached 100.00";
  return {model.tags.size() == 7 && reached > 0 && t <= 300.0,
          std::to_string(model.tags.size()) + " tags, final F1 " + fmt("%.2f", 100.0 * f1) + ", " + when + ", " +
              fmt("%.1f", t) + " s"};
}

// --- 5 and 6: pinned arithmetic ---------------------------------------------------

Outcome f1_arithmetic() {
  const double a = f1_from_pr(91.42, 95.01);
  const double b = f1_from_pr(72.92, 75.37);
  return {std::abs(a - 93.18) <= 0.005 && std::abs(b - 74.12) <= 0.005,
          "f1(91.42, 95.01) = " + fmt("%.4f", a) + ", f1(72.92, 75.37) = " + fmt("%.4f", b)};
}

Outcome kappa_band() {
  const AgreementTable table{{"A", "B"}, {{4, 1}, {1, 4}}};
  const double k = cohen_kappa(table);
  const std::string band(interpret_kappa(0.7321));
  return {std::abs(k - 0.6) <= 1e-12 && band == "Substantial agreement",
          "kappa = " + fmt("%.4f", k) + ", interpret(0.7321) = " + band};
}

// --- 7: SMOTE contract --------------------------------------------------------------

Outcome smote_contract() {
  const auto start = Clock::now();
  Rng rng(7);
  std::size_t rows = 0, inside = 0;
  bool counts_ok = true;
  std::string counts;
  for (const auto& [T, N, k] : {std::tuple{4, 200, 1}, std::tuple{4, 50, 1}, std::tuple{10, 300, 5}}) {
    std::vector<FeatureRow> minority(static_cast<std::size_t>(T));
    for (auto& r : minority) {
      r.label = "PER";
      for (int a = 0; a < 5; ++a) r.values.push_back(rng.uniform(-5, 5));
    }
    const auto out = smote(minority, {N, static_cast<std::size_t>(k), rng.next()});
    // floor(N/100) * T, after reducing T to floor(N/100 * T) when N < 100.
    const std::size_t expected =
        N < 100 ? static_cast<std::size_t>(N * T / 100) : static_cast<std::size_t>(N / 100 * T);
    counts_ok = counts_ok && out.rows.size() == expected;
    counts += (counts.empty() ? "" : ", ") + std::to_string(out.rows.size()) + "/" + std::to_string(expected);
    for (std::size_t r = 0; r < out.rows.size(); ++r) {
      const auto& s = minority[out.provenance[r].sample];
      const auto& n = minority[out.provenance[r].neighbor];
      bool ok = out.rows[r].label == "PER";
      for (std::size_t a = 0; a < s.values.size(); ++a) {
        const double v = out.rows[r].values[a];
        ok = ok && v >= std::min(s.values[a], n.values[a]) && v <= std::max(s.values[a], n.values[a]);
      }
      ++rows;
      inside += ok;
    }
  }
  const double t = seconds_since(start);
  return {counts_ok && inside == rows && t <= 1.0, "counts " + counts + ", " + std::to_string(inside) + "/" +
                                                       std::to_string(rows) + " rows on segment, " +
                                                       fmt("%.3f", t) + " s"};
}

// --- 8: scheme round trips ----------------------------------------------------------

Outcome scheme_round_trips() {
  Rng rng(8);
  std::size_t failures = 0;
  for (int i = 0; i < 1000; ++i) {
    const Corpus one{fixture::random_iob2_sentence(rng)};
    const auto iob1 = convert_scheme(one, TagScheme::IOB2, TagScheme::IOB1).corpus;
    const auto back = convert_scheme(iob1, TagScheme::IOB1, TagScheme::IOB2).corpus;
    const auto via_spans = spans_to_tags(extract_spans(one[0], TagScheme::IOB2), one[0].size(), TagScheme::IOB2);
    if (back != one || via_spans != one[0].tags()) ++failures;
  }
  const char* iob1_tags = "O,O,I-ORG,I-ORG,I-ORG,O,I-LOC,O,I-LOC,I-LOC,O,I-LOC,B-LOC,O";
  const char* iob2_tags = "O,O,B-ORG,I-ORG,I-ORG,O,B-LOC,O,B-LOC,I-LOC,O,B-LOC,B-LOC,O";
  Sentence fig;
  std::istringstream tags(iob1_tags);
  for (std::string t; std::getline(tags, t, ',');) fig.tokens.push_back({"x", parse_tag(t, TagScheme::IOB1)});
  const auto converted = convert_scheme({fig}, TagScheme::IOB1, TagScheme::IOB2).corpus[0];
  std::string row;
  for (const auto& tok : converted.tokens) row += (row.empty() ? "" : ",") + format_tag(tok.tag, TagScheme::IOB2);
  const bool sample_ok = row == iob2_tags;
  return {failures == 0 && sample_ok, "1000 sentences, " + std::to_string(failures) + " failures; IOB1 sample -> IOB2 " +
                                          (sample_ok ? "exact" : "differs: " + row)};
}

// --- 9: end-to-end determinism ----------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome train_determinism() {
  const fs::path dir = fs::temp_directory_path() / ("nertk-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  {
    std::ofstream corpus(dir / "train.tsv", std::ios::binary);
    corpus << write_corpus(fixture::synthetic_corpus(16, 30, 9), TagScheme::IOB2);
    std::ofstream config(dir / "run.cfg");
    config << "char_dim=5\nchar_hidden=4\nword_dim=8\nword_hidden=6\nbatch_size=4\n";
  }
  auto run = [&](const std::string& tag) {
    const std::string cmd = std::string("\"") + NERTK_CLI + "\" train --seed 1234 --epochs 3 --config \"" +
                            (dir / "run.cfg").string() + "\" --model \"" + (dir / (tag + ".model")).string() +
                            "\" \"" + (dir / "train.tsv").string() + "\" 2>/dev/null";
    return std::system(cmd.c_str());
  };
  const int a = run("a"), b = run("b");
  const std::string ma = slurp(dir / "a.model"), mb = slurp(dir / "b.model");
  const std::string la = slurp(dir / "a.model.log"), lb = slurp(dir / "b.model.log");
  fs::remove_all(dir);
  const bool ok = a == 0 && b == 0 && !ma.empty() && ma == mb && !la.empty() && la == lb;
  return {ok, "exit " + std::to_string(a) + "/" + std::to_string(b) + ", model " + std::to_string(ma.size()) +
                  " bytes " + (ma == mb ? "identical" : "DIFFERENT") + ", log " + (la == lb ? "identical" : "DIFFERENT")};
}

// --- 10: corpus statistics (non-gating) -----------------------------------------

Outcome corpus_statistics(bool& skipped) {
  const char* path = std::getenv("NERTK_ANEC_CORPUS");
  if (!path || !*path) {
    skipped = true;
    return {true, "NERTK_ANEC_CORPUS not set; run tools/reproduce.sh with the released corpus"};
  }
  const auto stats = corpus_stats(read_corpus_file(path, TagScheme::IOB2), TagScheme::IOB2);
  auto count = [&](const char* type) {
    const auto it = stats.type_tokens.find(type);
    return it == stats.type_tokens.end() ? std::size_t{0} : it->second;
  };
  const bool ok = count("PER") == 3809 && count("LOC") == 7199 && count("ORG") == 7596 &&
                  stats.outside_tokens == 164087 && stats.total_tokens == 182691 && stats.sentences == 8070;
  return {ok, "PER " + std::to_string(count("PER")) + ", LOC " + std::to_string(count("LOC")) + ", ORG " +
                  std::to_string(count("ORG")) + ", O " + std::to_string(stats.outside_tokens) + ", total " +
                  std::to_string(stats.total_tokens) + ", sentences " + std::to_string(stats.sentences)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "CRF partition oracle", partition_oracle},
      {2, "Viterbi oracle", viterbi_oracle},
      {3, "gradient suite", gradient_suite},
      {4, "overfit oracle", overfit_oracle},
      {5, "F1 arithmetic", f1_arithmetic},
      {6, "kappa band", kappa_band},
      {7, "SMOTE contract", smote_contract},
      {8, "scheme round trips", scheme_round_trips},
      {9, "train determinism", train_determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }

  bool skipped = false;
  Outcome stats;
  try {
    stats = corpus_statistics(skipped);
  } catch (const std::exception& e) {
    stats = {false, std::string("exception: ") + e.what()};
  }
  std::printf("%s criterion 10 (reproduction, non-gating; corpus statistics): %s\n",
              skipped ? "SKIP" : (stats.pass ? "PASS" : "FAIL"), stats.detail.c_str());
  if (!skipped && !stats.pass) ++failed;

  std::printf("%d gating failure(s)\n", failed);
  return failed == 0 ? 0 : 1;
}
