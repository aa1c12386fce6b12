// Command-line front end for the toolkit. Reports go to stdout, diagnostics
// to stderr. Exit status: 0 success, 1 data error, 2 usage error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "nertk/config.hpp"
#include "nertk/corpus.hpp"
#include "nertk/error.hpp"
#include "nertk/metrics.hpp"
#include "nertk/model.hpp"
#include "nertk/model_io.hpp"
#include "nertk/protocol.hpp"
#include "nertk/resample.hpp"
#include "nertk/train.hpp"
#include "nertk/translit.hpp"

#ifndef NERTK_DEFAULT_TABLE
#define NERTK_DEFAULT_TABLE "data/sera.tsv"
#endif

using namespace nertk;

namespace {

constexpr std::uint64_t kDefaultSeed = 42;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

TagScheme scheme_arg(const std::string& name) {
  try {
    return parse_scheme(name);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

bool kv_format(const std::string& format) {
  if (format == "kv") return true;
  if (format == "text") return false;
  throw UsageError("--format must be text or kv, got '" + format + "'");
}

std::string read_text(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Corpus load_corpus(const std::string& path, TagScheme scheme) {
  try {
    return parse_corpus(read_text(path), scheme);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

/// Writes to `path`, or stdout when the path is empty or "-".
void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
  if (!out) throw Error("failed writing '" + path + "'");
}

Corpus to_iob2(const Corpus& corpus, TagScheme scheme) {
  if (scheme == TagScheme::IOB2) {
    for (std::size_t s = 0; s < corpus.size(); ++s) {
      const auto v = validate_tags(corpus[s], scheme);
      if (!v.empty()) {
        throw Error("sentence " + std::to_string(s) + ", token " + std::to_string(v.front().index) + ": " +
                    v.front().message);
      }
    }
    return corpus;
  }
  return convert_scheme(corpus, scheme, TagScheme::IOB2).corpus;
}

/// Token-only input for tagging: one token per line (anything after a TAB is
/// ignored), blank lines between sentences.
std::vector<std::vector<std::string>> read_tokens(const std::string& path) {
  std::vector<std::vector<std::string>> sentences(1);
  std::istringstream in(read_text(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() == '#') continue;
    if (line.empty()) {
      if (!sentences.back().empty()) sentences.emplace_back();
      continue;
    }
    sentences.back().push_back(line.substr(0, line.find('\t')));
  }
  if (sentences.back().empty()) sentences.pop_back();
  return sentences;
}

void report_seed(std::uint64_t seed) { std::cerr << "seed=" << seed << "\n"; }

// --- subcommands ----------------------------------------------------------------

struct Options {
  std::string scheme = "iob2";
  std::string from, to;
  std::string metric = "conll";
  std::string format = "text";
  std::string config, embeddings, model, log, dev, table, target, label;
  std::string protocol, rebalance = "none";
  std::vector<std::string> files;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs, batch;
  std::optional<double> lr, dropout;
  int smote_n = 100;
  std::size_t smote_k = 5;
  std::size_t folds = 10;
  double train_fraction = 0.8;
  double tolerance = 1e-4;
  std::size_t sentences = 3;
  std::size_t max_entries = 0;
};

std::string file_at(const Options& o, std::size_t i) { return i < o.files.size() ? o.files[i] : std::string(); }

int run_convert(const Options& o) {
  report_seed(o.seed.value_or(kDefaultSeed));
  if (o.from.empty() || o.to.empty()) throw UsageError("convert needs --from and --to");
  const TagScheme from = scheme_arg(o.from), to = scheme_arg(o.to);
  const auto result = convert_scheme(load_corpus(o.files.at(0), from), from, to);
  if (result.merged_runs > 0) {
    std::cerr << "warning: " << result.merged_runs
              << " multi-token runs treated as single entities; adjacent same-type entities cannot be separated\n";
  }
  emit(file_at(o, 1), write_corpus(result.corpus, to));
  return 0;
}

int run_validate(const Options& o) {
  report_seed(o.seed.value_or(kDefaultSeed));
  const TagScheme scheme = scheme_arg(o.scheme);
  const Corpus corpus = load_corpus(o.files.at(0), scheme);
  std::size_t problems = 0;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    for (const auto& v : validate_tags(corpus[s], scheme)) {
      std::cout << o.files[0] << ": sentence " << s << ", token " << v.index << ": " << v.message << "\n";
      ++problems;
    }
  }
  if (problems > 0) {
    std::cerr << problems << " violation(s)\n";
    return 1;
  }
  std::cout << "ok: " << corpus.size() << " sentences valid under " << scheme_name(scheme) << "\n";
  return 0;
}

int run_stats(const Options& o) {
  report_seed(o.seed.value_or(kDefaultSeed));
  const TagScheme scheme = scheme_arg(o.scheme);
  const bool kv = kv_format(o.format);
  const auto stats = corpus_stats(load_corpus(o.files.at(0), scheme), scheme);
  if (kv) {
    write_stats_kv(std::cout, stats);
  } else {
    write_stats_text(std::cout, stats);
  }
  return 0;
}

int run_translit(const Options& o) {
  report_seed(o.seed.value_or(kDefaultSeed));
  const auto table = TranslitTable::load_file(o.table.empty() ? NERTK_DEFAULT_TABLE : o.table);
  const auto r = transliterate(read_text(o.files.at(0)), table);
  emit(file_at(o, 1), r.text);
  std::cerr << "mapped=" << r.mapped << " unmapped=" << r.unmapped << "\n";
  return 0;
}

int run_kappa(const Options& o) {
  report_seed(o.seed.value_or(kDefaultSeed));
  const TagScheme scheme = scheme_arg(o.scheme);
  const bool kv = kv_format(o.format);
  if (o.files.size() != 2) throw UsageError("kappa needs two annotation files");
  const auto table =
      AgreementTable::from_corpora(load_corpus(o.files[0], scheme), load_corpus(o.files[1], scheme), scheme);
  const double k = cohen_kappa(table);
  if (kv) {
    std::cout << std::fixed << std::setprecision(6) << "kappa=" << k << "\nobserved=" << table.observed()
              << "\nchance=" << table.chance() << "\ntokens=" << std::setprecision(0) << table.total()
              << "\nband=" << interpret_kappa(k) << "\n";
  } else {
    std::cout << std::fixed << std::setprecision(4) << "kappa=" << k << "\n" << interpret_kappa(k) << "\n";
  }
  return 0;
}

int run_smote(const Options& o) {
  const std::uint64_t seed = o.seed.value_or(kDefaultSeed);
  report_seed(seed);
  if (o.target.empty() == o.label.empty()) throw UsageError("smote needs exactly one of --target or --label");
  if (o.smote_n <= 0) throw UsageError("--smote-n must be positive");
  if (o.smote_k == 0) throw UsageError("--smote-k must be at least 1");
  const FeatureSet input = FeatureSet::load_file(o.files.at(0));
  const SmoteConfig config{o.smote_n, o.smote_k, seed};
  FeatureSet out;
  out.numattr = input.numattr;
  if (!o.target.empty()) {
    out.rows = balance_token_dataset(input.rows, BalanceTarget::parse(o.target), config);
  } else {
    std::vector<FeatureRow> minority;
    for (const auto& r : input.rows) {
      if (r.label == o.label) minority.push_back(r);
    }
    if (minority.empty()) throw Error("no rows labeled '" + o.label + "'");
    const auto synthetic = smote(minority, config);
    out.rows = input.rows;
    out.rows.insert(out.rows.end(), synthetic.rows.begin(), synthetic.rows.end());
    std::cerr << "synthetic=" << synthetic.rows.size() << "\n";
  }
  std::ostringstream text;
  out.write(text);
  emit(file_at(o, 1), text.str());
  return 0;
}

TrainConfig resolve_train_config(const Options& o) {
  TrainConfig config;
  if (!o.config.empty()) config.apply(load_key_values_file(o.config));
  if (o.seed) config.seed = *o.seed;
  if (o.epochs) config.max_epochs = *o.epochs;
  if (o.batch) config.batch_size = *o.batch;
  if (o.lr) config.learning_rate = *o.lr;
  if (o.dropout) config.dropout = *o.dropout;
  try {
    config.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return config;
}

std::string format_number(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

int run_protocol_mode(const Options& o, const TrainConfig& config, const Corpus& corpus,
                      const EmbeddingTable* pretrained) {
  ProtocolConfig pc;
  pc.train = config;
  pc.pretrained = pretrained;
  if (o.protocol == "kfold") {
    pc.kind = ProtocolConfig::Kind::KFold;
    pc.folds = o.folds;
  } else if (o.protocol == "holdout") {
    pc.kind = ProtocolConfig::Kind::Holdout;
    pc.train_fraction = o.train_fraction;
  } else {
    throw UsageError("--protocol must be kfold or holdout");
  }
  if (o.rebalance == "none") {
    pc.rebalance = Rebalance::None;
  } else if (o.rebalance == "sentences") {
    pc.rebalance = Rebalance::Sentences;
  } else if (o.rebalance == "smote") {
    pc.rebalance = Rebalance::TokenFeatures;
  } else {
    throw UsageError("--rebalance must be none, sentences or smote");
  }
  pc.smote = {o.smote_n, o.smote_k, config.seed};
  const auto result = run_protocol(corpus, pc, [](const std::string& line) { std::cerr << line << "\n"; });
  std::cout << std::fixed << std::setprecision(2);
  for (const auto& f : result.folds) {
    std::cout << "fold " << f.fold << " train=" << f.train_sentences << " test=" << f.test_sentences
              << " P=" << 100.0 * f.conll.precision << " R=" << 100.0 * f.conll.recall
              << " F1=" << 100.0 * f.conll.f1 << "\n";
  }
  std::cout << "mean F1=" << 100.0 * result.mean_f1() << " sd=" << 100.0 * result.stddev_f1() << "\n";
  return 0;
}

int run_train(const Options& o) {
  const TagScheme scheme = scheme_arg(o.scheme);
  const TrainConfig config = resolve_train_config(o);
  report_seed(config.seed);
  const Corpus corpus = to_iob2(load_corpus(o.files.at(0), scheme), scheme);
  if (corpus.empty()) throw Error(o.files[0] + ": corpus is empty");

  std::optional<EmbeddingTable> pretrained;
  if (!o.embeddings.empty()) {
    Rng rng(derive_seed(config.seed, 0xE3B));
    pretrained = load_embeddings_file(o.embeddings, config.dims.word_dim, rng);
  }
  if (!o.protocol.empty()) return run_protocol_mode(o, config, corpus, pretrained ? &*pretrained : nullptr);
  if (o.model.empty()) throw UsageError("train needs --model (or --protocol)");

  std::optional<Corpus> dev;
  if (!o.dev.empty()) dev = to_iob2(load_corpus(o.dev, scheme), scheme);

  Model model = init_model(corpus, config.dims, config.dropout, config.seed, pretrained ? &*pretrained : nullptr);
  model.metadata["seed"] = std::to_string(config.seed);
  for (const auto& [k, v] : config.to_key_values()) model.metadata["config." + k] = v;

  std::ostringstream log;
  log << "# training log\n";
  log << "seed=" << config.seed << "\n";
  write_key_values(log, config.to_key_values());
  log << "sentences=" << corpus.size() << "\n";
  log << "tags=";
  for (std::size_t i = 0; i < model.tags.size(); ++i) log << (i ? "," : "") << model.tags[i];
  log << "\n";
  if (pretrained) log << "pretrained_rows=" << pretrained->size() << "\n";

  TrainCallbacks cb;
  if (dev) cb.dev = &*dev;
  cb.on_epoch = [&](const EpochLog& e) {
    std::ostringstream line;
    line << "epoch=" << e.epoch << " loss=" << format_number(e.loss);
    if (e.dev_f1) line << " dev_f1=" << format_number(*e.dev_f1);
    log << line.str() << "\n";
    std::cerr << line.str() << "\n";
  };
  const auto result = train_model(model, corpus, config, cb);
  if (result.stopped_early) log << "stopped_early=true\n";

  save_model_file(o.model, model);
  emit(o.log.empty() ? o.model + ".log" : o.log, log.str());
  return 0;
}

int run_tag(const Options& o) {
  report_seed(o.seed.value_or(kDefaultSeed));
  if (o.model.empty()) throw UsageError("tag needs --model");
  const TagScheme scheme = scheme_arg(o.scheme);
  const Model model = load_model_file(o.model);
  Corpus tagged;
  for (const auto& words : read_tokens(o.files.at(0))) {
    const auto tags = tag_sentence(model, words);
    Sentence s;
    for (std::size_t i = 0; i < words.size(); ++i) s.tokens.push_back({words[i], tags[i]});
    tagged.push_back(std::move(s));
  }
  if (scheme != TagScheme::IOB2) tagged = convert_scheme(tagged, TagScheme::IOB2, scheme).corpus;
  emit(file_at(o, 1), write_corpus(tagged, scheme));
  return 0;
}

int run_eval(const Options& o) {
  report_seed(o.seed.value_or(kDefaultSeed));
  const TagScheme scheme = scheme_arg(o.scheme);
  const bool kv = kv_format(o.format);
  if (o.files.size() != 2) throw UsageError("eval needs a gold file and a predicted file");
  if (o.metric != "conll" && o.metric != "muc" && o.metric != "semeval") {
    throw UsageError("--metric must be conll, muc or semeval");
  }
  const Corpus gold = load_corpus(o.files[0], scheme);
  const Corpus pred = load_corpus(o.files[1], scheme);
  if (o.metric == "conll") {
    const auto r = conll_evaluate(gold, pred, scheme);
    kv ? write_conll_kv(std::cout, r) : write_conll_text(std::cout, r);
  } else if (o.metric == "muc") {
    const auto r = muc_evaluate(gold, pred, scheme);
    kv ? write_category_kv(std::cout, r) : write_category_text(std::cout, r);
  } else if (o.metric == "semeval") {
    const auto r = semeval_evaluate(gold, pred, scheme);
    bool first = true;
    for (const auto* mode : {&r.strict, &r.exact, &r.partial, &r.type}) {
      if (!kv && !first) std::cout << "\n";
      first = false;
      kv ? write_category_kv(std::cout, *mode) : write_category_text(std::cout, *mode);
    }
  } else {
    throw UsageError("--metric must be conll, muc or semeval");
  }
  return 0;
}

int run_gradcheck(const Options& o) {
  const std::uint64_t seed = o.seed.value_or(kDefaultSeed);
  report_seed(seed);
  const TagScheme scheme = scheme_arg(o.scheme);
  const Corpus corpus = to_iob2(load_corpus(o.files.at(0), scheme), scheme);
  if (corpus.empty()) throw Error(o.files[0] + ": corpus is empty");
  Model model;
  if (!o.model.empty()) {
    model = load_model_file(o.model);
  } else {
    // Tiny random model: every tensor, CRF included, drawn uniformly.
    ModelDims dims;
    dims.char_dim = 3;
    dims.char_hidden = 2;
    dims.word_dim = 4;
    dims.word_hidden = 3;
    model = init_model(corpus, dims, o.dropout.value_or(0.3), seed);
    Rng rng(derive_seed(seed, 1));
    for (auto& t : tensors(model.params)) {
      for (Eigen::Index i = 0; i < t.data.size(); ++i) t.data.data()[i] = rng.uniform(-0.5, 0.5);
    }
  }
  GradCheckOptions options;
  options.tolerance = o.tolerance;
  options.max_entries_per_tensor = o.max_entries;
  options.seed = seed;

  bool passed = true;
  const std::size_t n = std::min(o.sentences, corpus.size());
  for (std::size_t s = 0; s < n; ++s) {
    const auto report = gradient_check(model, corpus[s], options);
    std::cout << "sentence " << s << " (" << corpus[s].size() << " tokens)\n";
    for (const auto& t : report.tensors) {
      std::cout << "  " << std::left << std::setw(32) << t.name << std::right << std::setw(6) << t.checked << "  "
                << std::scientific << std::setprecision(3) << t.max_relative_error << std::defaultfloat
                << (t.max_relative_error <= report.tolerance ? "" : "  FAIL") << "\n";
    }
    std::cout << "  worst " << std::scientific << std::setprecision(3) << report.worst() << std::defaultfloat
              << (report.passed() ? " ok" : " FAIL") << "\n";
    passed = passed && report.passed();
  }
  return passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Named-entity recognition toolkit: corpora, SMOTE, BiLSTM-CRF training and evaluation"};
  app.require_subcommand(1);
  Options o;
  std::function<int()> action;

  const auto seed_opt = [&](CLI::App* sub) { sub->add_option("--seed", o.seed, "random seed"); };
  const auto scheme_opt = [&](CLI::App* sub) {
    sub->add_option("--scheme", o.scheme, "tagging scheme: stanford, iob1, iob2")->capture_default_str();
  };
  const auto format_opt = [&](CLI::App* sub) {
    sub->add_option("--format", o.format, "output format: text or kv")->capture_default_str();
  };

  auto* convert = app.add_subcommand("convert", "convert a corpus between tagging schemes");
  convert->add_option("--from", o.from, "input scheme")->required();
  convert->add_option("--to", o.to, "output scheme")->required();
  convert->add_option("files", o.files, "input [output]")->required()->expected(1, 2);
  seed_opt(convert);
  convert->callback([&] { action = [&] { return run_convert(o); }; });

  auto* validate = app.add_subcommand("validate", "check a corpus against its tagging scheme");
  validate->add_option("file", o.files, "corpus")->required()->expected(1);
  scheme_opt(validate);
  seed_opt(validate);
  validate->callback([&] { action = [&] { return run_validate(o); }; });

  auto* stats = app.add_subcommand("stats", "token counts per entity type");
  stats->add_option("file", o.files, "corpus")->required()->expected(1);
  scheme_opt(stats);
  format_opt(stats);
  seed_opt(stats);
  stats->callback([&] { action = [&] { return run_stats(o); }; });

  auto* translit = app.add_subcommand("translit", "transliterate text with a character table");
  translit->add_option("files", o.files, "input [output]")->required()->expected(1, 2);
  translit->add_option("--table", o.table, "char<TAB>latin table (default: bundled SERA table)");
  seed_opt(translit);
  translit->callback([&] { action = [&] { return run_translit(o); }; });

  auto* kappa = app.add_subcommand("kappa", "Cohen's kappa between two annotations of the same tokens");
  kappa->add_option("files", o.files, "first second")->required()->expected(2);
  scheme_opt(kappa);
  format_opt(kappa);
  seed_opt(kappa);
  kappa->callback([&] { action = [&] { return run_kappa(o); }; });

  auto* smote_cmd = app.add_subcommand("smote", "SMOTE oversampling of a feature-row file");
  smote_cmd->add_option("files", o.files, "input [output]")->required()->expected(1, 2);
  smote_cmd->add_option("--smote-n", o.smote_n, "amount of SMOTE in percent")->capture_default_str();
  smote_cmd->add_option("--smote-k", o.smote_k, "nearest neighbours")->capture_default_str();
  smote_cmd->add_option("--target", o.target, "balance target: match-majority, a count, or LABEL=n,...");
  smote_cmd->add_option("--label", o.label, "oversample only this label");
  seed_opt(smote_cmd);
  smote_cmd->callback([&] { action = [&] { return run_smote(o); }; });

  auto* train = app.add_subcommand("train", "train a BiLSTM-CRF model");
  train->add_option("file", o.files, "training corpus")->required()->expected(1);
  scheme_opt(train);
  seed_opt(train);
  train->add_option("--config", o.config, "key=value training config");
  train->add_option("--embeddings", o.embeddings, "pretrained word vectors (`V D` header)");
  train->add_option("--model", o.model, "output model file");
  train->add_option("--log", o.log, "run log (default: <model>.log)");
  train->add_option("--dev", o.dev, "development corpus for per-epoch F1");
  train->add_option("--epochs", o.epochs, "maximum epochs");
  train->add_option("--batch", o.batch, "batch size");
  train->add_option("--lr", o.lr, "learning rate");
  train->add_option("--dropout", o.dropout, "dropout rate");
  train->add_option("--protocol", o.protocol, "evaluate instead of saving: kfold or holdout");
  train->add_option("--folds", o.folds, "folds for --protocol kfold")->capture_default_str();
  train->add_option("--train-fraction", o.train_fraction, "train share for --protocol holdout")
      ->capture_default_str();
  train->add_option("--rebalance", o.rebalance, "training-side rebalancing: none, sentences, smote")
      ->capture_default_str();
  train->add_option("--smote-n", o.smote_n, "amount of SMOTE in percent")->capture_default_str();
  train->add_option("--smote-k", o.smote_k, "nearest neighbours")->capture_default_str();
  train->callback([&] { action = [&] { return run_train(o); }; });

  auto* tag = app.add_subcommand("tag", "tag tokens with a saved model");
  tag->add_option("files", o.files, "input [output]")->required()->expected(1, 2);
  tag->add_option("--model", o.model, "model file")->required();
  tag->add_option("--scheme", o.scheme, "output scheme")->capture_default_str();
  seed_opt(tag);
  tag->callback([&] { action = [&] { return run_tag(o); }; });

  auto* eval = app.add_subcommand("eval", "score predictions against gold annotations");
  eval->add_option("files", o.files, "gold predicted")->required()->expected(2);
  eval->add_option("--metric", o.metric, "conll, muc or semeval")->capture_default_str();
  scheme_opt(eval);
  format_opt(eval);
  seed_opt(eval);
  eval->callback([&] { action = [&] { return run_eval(o); }; });

  auto* gradcheck = app.add_subcommand("gradcheck", "compare analytic and numerical gradients");
  gradcheck->add_option("file", o.files, "corpus supplying sample sentences")->required()->expected(1);
  gradcheck->add_option("--model", o.model, "model to check (default: tiny random model)");
  gradcheck->add_option("--sentences", o.sentences, "sentences to check")->capture_default_str();
  gradcheck->add_option("--tolerance", o.tolerance, "maximum relative error")->capture_default_str();
  gradcheck->add_option("--max-entries", o.max_entries, "sampled entries per tensor, 0 = all")
      ->capture_default_str();
  gradcheck->add_option("--dropout", o.dropout, "dropout of the tiny random model");
  scheme_opt(gradcheck);
  seed_opt(gradcheck);
  gradcheck->callback([&] { action = [&] { return run_gradcheck(o); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    return action();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
