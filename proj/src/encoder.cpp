#include "nertk/encoder.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "nertk/error.hpp"
#include "nertk/utf8.hpp"

namespace nertk {

// --- vocabulary and tables ------------------------------------------------------

Vocabulary::Vocabulary(std::vector<std::string> entries) {
  for (auto& e : entries) {
    if (find(e)) throw Error("duplicate vocabulary entry '" + e + "'");
    add(e);
  }
}

std::size_t Vocabulary::add(const std::string& entry) {
  const auto [it, inserted] = index_.try_emplace(entry, entries_.size());
  if (inserted) entries_.push_back(entry);
  return it->second;
}

std::optional<std::size_t> Vocabulary::find(std::string_view entry) const {
  const auto it = index_.find(std::string(entry));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

double embedding_bound(Eigen::Index dim) { return std::sqrt(6.0 / static_cast<double>(1 + dim)); }

Vec random_row(Eigen::Index dim, Rng& rng) {
  const double bound = embedding_bound(dim);
  Vec v(dim);
  for (Eigen::Index d = 0; d < dim; ++d) v(d) = rng.uniform(-bound, bound);
  return v;
}

}  // namespace

EmbeddingTable EmbeddingTable::random(std::shared_ptr<const Vocabulary> vocab, Eigen::Index dim,
                                      Rng& rng) {
  EmbeddingTable t;
  const auto V = static_cast<Eigen::Index>(vocab->size());
  t.vocab = std::move(vocab);
  t.matrix.resize(V, dim);
  for (Eigen::Index r = 0; r < V; ++r) t.matrix.row(r) = random_row(dim, rng).transpose();
  t.unk = random_row(dim, rng);
  return t;
}

EmbeddingTable EmbeddingTable::zeros_like(const EmbeddingTable& other) {
  EmbeddingTable t;
  t.vocab = other.vocab;
  t.matrix = Mat::Zero(other.matrix.rows(), other.matrix.cols());
  t.unk = Vec::Zero(other.unk.size());
  return t;
}

std::optional<std::size_t> EmbeddingTable::find(std::string_view token) const {
  return vocab ? vocab->find(token) : std::nullopt;
}

Vec EmbeddingTable::lookup(std::string_view token) const {
  if (const auto row = find(token)) return matrix.row(static_cast<Eigen::Index>(*row)).transpose();
  return unk;
}

EmbeddingTable load_embeddings(std::istream& in, std::size_t expected_dim, Rng& rng) {
  std::string line;
  if (!std::getline(in, line)) throw Error("embedding file is empty", 1);
  std::size_t count = 0, dim = 0;
  {
    std::istringstream header(line);
    long long v = -1, d = -1;
    std::string rest;
    if (!(header >> v >> d) || v < 0 || d <= 0 || (header >> rest)) {
      throw Error("header must be `V D`", 1);
    }
    count = static_cast<std::size_t>(v);
    dim = static_cast<std::size_t>(d);
  }
  if (dim != expected_dim) {
    throw Error("embedding dimension " + std::to_string(dim) + " does not match expected " +
                    std::to_string(expected_dim),
                1);
  }
  auto vocab = std::make_shared<Vocabulary>();
  std::vector<double> values;
  values.reserve(count * dim);
  std::size_t line_no = 1;
  while (vocab->size() < count && std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) throw Error("empty embedding row", line_no);
    if (vocab->find(token)) throw Error("duplicate token '" + token + "'", line_no);
    std::size_t n = 0;
    std::string field;
    while (fields >> field) {
      std::size_t used = 0;
      double x = 0;
      try {
        x = std::stod(field, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != field.size() || !std::isfinite(x)) {
        throw Error("non-numeric value '" + field + "'", line_no);
      }
      if (++n > dim) break;
      values.push_back(x);
    }
    if (n != dim) {
      throw Error("expected " + std::to_string(dim) + " values for '" + token + "', found " +
                      std::to_string(n),
                  line_no);
    }
    vocab->add(token);
  }
  if (vocab->size() != count) {
    throw Error("header declares " + std::to_string(count) + " rows, file has " +
                std::to_string(vocab->size()));
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      throw Error("rows beyond the declared count", line_no);
    }
  }
  EmbeddingTable table;
  table.matrix.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < count; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      table.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * dim + c];
    }
  }
  table.vocab = std::move(vocab);
  table.unk = random_row(static_cast<Eigen::Index>(dim), rng);
  return table;
}

EmbeddingTable load_embeddings_file(const std::string& path, std::size_t expected_dim, Rng& rng) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embedding file '" + path + "'");
  try {
    return load_embeddings(in, expected_dim, rng);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

EncoderParams EncoderParams::zeros_like(const EncoderParams& other) {
  EncoderParams g;
  g.chars = EmbeddingTable::zeros_like(other.chars);
  g.char_bilstm = BiLstmParams::zeros(other.char_bilstm.forward.input_dim(), other.char_bilstm.hidden());
  g.words = EmbeddingTable::zeros_like(other.words);
  g.word_bilstm = BiLstmParams::zeros(other.word_bilstm.forward.input_dim(), other.word_bilstm.hidden());
  g.projection = Mat::Zero(other.projection.rows(), other.projection.cols());
  g.projection_bias = Vec::Zero(other.projection_bias.size());
  g.dropout = other.dropout;
  return g;
}

// --- forward ---------------------------------------------------------------------

std::vector<std::string> surfaces(const Sentence& sentence) {
  std::vector<std::string> out;
  out.reserve(sentence.size());
  for (const auto& t : sentence.tokens) out.push_back(t.surface);
  return out;
}

namespace {

EncoderTrace::Word trace_word_chars(const EncoderParams& params, std::string_view word) {
  if (word.empty()) throw Error("cannot encode an empty word");
  EncoderTrace::Word w;
  std::vector<Vec> inputs;
  for (const auto& ch : utf8::split_chars(word)) {
    w.char_rows.push_back(params.chars.find(ch));
    inputs.push_back(params.chars.lookup(ch));
  }
  w.chars = bilstm_trace(params.char_bilstm, inputs);
  return w;
}

Vec char_representation(const BiLstmTrace& t) {
  const Vec& fwd = t.forward.steps.back().h;
  const Vec& bwd = t.backward.steps.back().h;
  Vec out(fwd.size() + bwd.size());
  out << fwd, bwd;
  return out;
}

Vec dropout_mask(Eigen::Index dim, double rate, Rng& rng) {
  Vec mask(dim);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Eigen::Index d = 0; d < dim; ++d) mask(d) = rng.uniform() < rate ? 0.0 : keep_scale;
  return mask;
}

}  // namespace

Vec encode_word_chars(const EncoderParams& params, std::string_view word) {
  return char_representation(trace_word_chars(params, word).chars);
}

Mat encode_sentence(const EncoderParams& params, std::span<const std::string> words, Mode mode,
                    std::uint64_t seed, EncoderTrace* trace) {
  if (words.empty()) throw Error("cannot encode an empty sentence");
  EncoderTrace local;
  EncoderTrace& tr = trace ? *trace : local;
  tr = EncoderTrace{};
  const std::size_t L = words.size();
  const bool drop = mode == Mode::Train && params.dropout > 0.0;
  Rng rng(seed);

  tr.words.reserve(L);
  tr.inputs.reserve(L);
  for (const auto& word : words) {
    tr.words.push_back(trace_word_chars(params, word));
    tr.words.back().word_row = params.words.find(word);
    Vec x(params.input_dim());
    x << params.words.lookup(word), char_representation(tr.words.back().chars);
    tr.inputs.push_back(std::move(x));
  }

  std::vector<Vec> dropped = tr.inputs;
  if (drop) {
    for (std::size_t t = 0; t < L; ++t) {
      tr.input_masks.push_back(dropout_mask(params.input_dim(), params.dropout, rng));
      dropped[t] = dropped[t].cwiseProduct(tr.input_masks.back());
    }
  }

  tr.sentence = bilstm_trace(params.word_bilstm, dropped);
  tr.outputs.resize(L);
  for (std::size_t t = 0; t < L; ++t) tr.outputs[t] = tr.sentence.output(t);
  if (drop) {
    for (std::size_t t = 0; t < L; ++t) {
      tr.output_masks.push_back(dropout_mask(tr.outputs[t].size(), params.dropout, rng));
      tr.outputs[t] = tr.outputs[t].cwiseProduct(tr.output_masks.back());
    }
  }

  Mat emissions(static_cast<Eigen::Index>(L), params.num_tags());
  for (std::size_t t = 0; t < L; ++t) {
    emissions.row(static_cast<Eigen::Index>(t)) =
        (params.projection.transpose() * tr.outputs[t] + params.projection_bias).transpose();
  }
  return emissions;
}

Mat encode_sentence(const EncoderParams& params, const Sentence& sentence, Mode mode,
                    std::uint64_t seed, EncoderTrace* trace) {
  const auto words = surfaces(sentence);
  return encode_sentence(params, std::span<const std::string>(words), mode, seed, trace);
}

// --- backward --------------------------------------------------------------------

void encoder_backward(const EncoderParams& params, const EncoderTrace& tr, const Mat& d_emissions,
                      EncoderParams& grad) {
  const std::size_t L = tr.words.size();
  std::vector<Vec> d_out(L);
  for (std::size_t t = 0; t < L; ++t) {
    const Vec de = d_emissions.row(static_cast<Eigen::Index>(t)).transpose();
    grad.projection.noalias() += tr.outputs[t] * de.transpose();
    grad.projection_bias += de;
    d_out[t] = params.projection * de;
    if (!tr.output_masks.empty()) d_out[t] = d_out[t].cwiseProduct(tr.output_masks[t]);
  }

  std::vector<Vec> d_in = bilstm_backward(params.word_bilstm, tr.sentence, d_out, grad.word_bilstm);
  const Eigen::Index word_dim = params.words.dim();
  const Eigen::Index hc = params.char_bilstm.hidden();
  for (std::size_t t = 0; t < L; ++t) {
    if (!tr.input_masks.empty()) d_in[t] = d_in[t].cwiseProduct(tr.input_masks[t]);
    const auto& w = tr.words[t];
    if (w.word_row) {
      grad.words.matrix.row(static_cast<Eigen::Index>(*w.word_row)) += d_in[t].head(word_dim).transpose();
    } else {
      grad.words.unk += d_in[t].head(word_dim);
    }

    // Only the final state of each char direction reaches the output.
    const std::size_t n = w.char_rows.size();
    const Vec d_repr = d_in[t].tail(2 * hc);
    std::vector<Vec> dh_f(n, Vec::Zero(hc)), dh_b(n, Vec::Zero(hc));
    dh_f[n - 1] = d_repr.head(hc);
    dh_b[0] = d_repr.tail(hc);
    std::vector<Vec> dx = lstm_run_backward(params.char_bilstm.forward, w.chars.forward, dh_f,
                                            grad.char_bilstm.forward);
    const std::vector<Vec> dx_b = lstm_run_backward(params.char_bilstm.backward, w.chars.backward,
                                                    dh_b, grad.char_bilstm.backward);
    for (std::size_t c = 0; c < n; ++c) {
      const Vec d = dx[c] + dx_b[c];
      if (w.char_rows[c]) {
        grad.chars.matrix.row(static_cast<Eigen::Index>(*w.char_rows[c])) += d.transpose();
      } else {
        grad.chars.unk += d;
      }
    }
  }
}

}  // namespace nertk
