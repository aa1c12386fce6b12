#include "nertk/model.hpp"

#include <cmath>
#include <set>

#include "nertk/error.hpp"
#include "nertk/utf8.hpp"

namespace nertk {

ModelParams ModelParams::zeros_like(const ModelParams& other) {
  ModelParams g;
  g.encoder = EncoderParams::zeros_like(other.encoder);
  g.crf = CrfParams::zeros(other.crf.num_tags());
  g.crf.mask = other.crf.mask;
  return g;
}

namespace {

void add_tensor(std::vector<TensorRef>& out, std::string name, Mat& m) {
  out.push_back({std::move(name), Eigen::Map<Mat>(m.data(), m.rows(), m.cols())});
}

void add_tensor(std::vector<TensorRef>& out, std::string name, Vec& v) {
  out.push_back({std::move(name), Eigen::Map<Mat>(v.data(), v.size(), 1)});
}

void add_lstm(std::vector<TensorRef>& out, const std::string& prefix, LstmParams& p) {
  add_tensor(out, prefix + ".w_fx", p.w_fx);
  add_tensor(out, prefix + ".w_ix", p.w_ix);
  add_tensor(out, prefix + ".w_cx", p.w_cx);
  add_tensor(out, prefix + ".w_ox", p.w_ox);
  add_tensor(out, prefix + ".w_fh", p.w_fh);
  add_tensor(out, prefix + ".w_ih", p.w_ih);
  add_tensor(out, prefix + ".w_ch", p.w_ch);
  add_tensor(out, prefix + ".w_oh", p.w_oh);
  add_tensor(out, prefix + ".peep_f", p.peep_f);
  add_tensor(out, prefix + ".peep_i", p.peep_i);
  add_tensor(out, prefix + ".peep_o", p.peep_o);
  add_tensor(out, prefix + ".b_f", p.b_f);
  add_tensor(out, prefix + ".b_i", p.b_i);
  add_tensor(out, prefix + ".b_c", p.b_c);
  add_tensor(out, prefix + ".b_o", p.b_o);
}

}  // namespace

std::vector<TensorRef> tensors(ModelParams& p) {
  std::vector<TensorRef> out;
  add_tensor(out, "char_table.matrix", p.encoder.chars.matrix);
  add_tensor(out, "char_table.unk", p.encoder.chars.unk);
  add_lstm(out, "char_bilstm.forward", p.encoder.char_bilstm.forward);
  add_lstm(out, "char_bilstm.backward", p.encoder.char_bilstm.backward);
  add_tensor(out, "word_table.matrix", p.encoder.words.matrix);
  add_tensor(out, "word_table.unk", p.encoder.words.unk);
  add_lstm(out, "word_bilstm.forward", p.encoder.word_bilstm.forward);
  add_lstm(out, "word_bilstm.backward", p.encoder.word_bilstm.backward);
  add_tensor(out, "projection.weight", p.encoder.projection);
  add_tensor(out, "projection.bias", p.encoder.projection_bias);
  add_tensor(out, "crf.transitions", p.crf.transitions);
  add_tensor(out, "crf.start", p.crf.start);
  add_tensor(out, "crf.end", p.crf.end);
  return out;
}

std::vector<ConstTensorRef> tensors(const ModelParams& p) {
  std::vector<ConstTensorRef> out;
  for (auto& t : tensors(const_cast<ModelParams&>(p))) {
    out.push_back({t.name, Eigen::Map<const Mat>(t.data.data(), t.data.rows(), t.data.cols())});
  }
  return out;
}

std::size_t Model::tag_index(const Tag& tag) const {
  const std::string name = format_tag(tag, TagScheme::IOB2);
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i] == name) return i;
  }
  throw Error("tag '" + name + "' is not in the model's tag set");
}

Tag Model::tag_at(std::size_t index) const { return parse_tag(tags.at(index), TagScheme::IOB2); }

std::vector<std::string> build_tagset(const Corpus& corpus) {
  std::set<std::string> types;
  for (const auto& s : corpus) {
    for (const auto& t : s.tokens) {
      if (!t.tag.is_outside()) types.insert(t.tag.type);
    }
  }
  std::vector<std::string> tags{"O"};
  for (const auto& type : types) {
    tags.push_back("B-" + type);
    tags.push_back("I-" + type);
  }
  return tags;
}

Vocabulary build_word_vocabulary(const Corpus& corpus) {
  Vocabulary v;
  for (const auto& s : corpus) {
    for (const auto& t : s.tokens) v.add(t.surface);
  }
  return v;
}

Vocabulary build_char_vocabulary(const Corpus& corpus) {
  Vocabulary v;
  for (const auto& s : corpus) {
    for (const auto& t : s.tokens) {
      for (const auto& ch : utf8::split_chars(t.surface)) v.add(ch);
    }
  }
  return v;
}

Model init_model(const Corpus& corpus, const ModelDims& dims, double dropout, std::uint64_t seed,
                 const EmbeddingTable* pretrained) {
  if (corpus.empty()) throw Error("cannot build a model from an empty corpus");
  if (dropout < 0.0 || dropout >= 1.0) throw Error("dropout must lie in [0, 1)");
  if (pretrained && pretrained->dim() != static_cast<Eigen::Index>(dims.word_dim)) {
    throw Error("pretrained embeddings have dimension " + std::to_string(pretrained->dim()) +
                ", model expects " + std::to_string(dims.word_dim));
  }
  Model m;
  m.dims = dims;
  m.tags = build_tagset(corpus);
  Rng rng(seed);
  const auto cd = static_cast<Eigen::Index>(dims.char_dim);
  const auto ch = static_cast<Eigen::Index>(dims.char_hidden);
  const auto wd = static_cast<Eigen::Index>(dims.word_dim);
  const auto wh = static_cast<Eigen::Index>(dims.word_hidden);
  const auto K = static_cast<Eigen::Index>(m.tags.size());

  auto& enc = m.params.encoder;
  enc.dropout = dropout;
  enc.chars = EmbeddingTable::random(std::make_shared<Vocabulary>(build_char_vocabulary(corpus)), cd, rng);
  enc.char_bilstm = BiLstmParams::random(cd, ch, rng);
  enc.words = EmbeddingTable::random(std::make_shared<Vocabulary>(build_word_vocabulary(corpus)), wd, rng);
  if (pretrained) {
    for (std::size_t r = 0; r < enc.words.size(); ++r) {
      if (const auto row = pretrained->find(enc.words.vocab->at(r))) {
        enc.words.matrix.row(static_cast<Eigen::Index>(r)) =
            pretrained->matrix.row(static_cast<Eigen::Index>(*row));
      }
    }
    enc.words.unk = pretrained->unk;
  }
  enc.word_bilstm = BiLstmParams::random(wd + 2 * ch, wh, rng);
  const double bound = std::sqrt(6.0 / static_cast<double>(2 * wh + K));
  enc.projection.resize(2 * wh, K);
  for (Eigen::Index r = 0; r < 2 * wh; ++r) {
    for (Eigen::Index c = 0; c < K; ++c) enc.projection(r, c) = rng.uniform(-bound, bound);
  }
  enc.projection_bias = Vec::Zero(K);

  m.params.crf = CrfParams::zeros(m.tags.size());
  m.params.crf.mask = build_iob2_mask(m.tags);
  return m;
}

TagSequence gold_sequence(const Model& model, const Sentence& sentence) {
  TagSequence seq;
  seq.reserve(sentence.size());
  for (const auto& t : sentence.tokens) seq.push_back(model.tag_index(t.tag));
  return seq;
}

double sentence_nll(const Model& model, const Sentence& sentence, Mode mode, std::uint64_t seed,
                    bool masked_training, ModelParams* grad) {
  EncoderTrace trace;
  const Mat emissions = encode_sentence(model.params.encoder, sentence, mode, seed, &trace);
  const TagSequence gold = gold_sequence(model, sentence);
  const CrfParams crf = masked_training ? model.params.crf : model.params.crf.unconstrained();
  const NllResult nll = nll_loss_and_grad(crf, emissions, gold);
  if (grad) {
    grad->crf.transitions += nll.grad.transitions;
    grad->crf.start += nll.grad.start;
    grad->crf.end += nll.grad.end;
    encoder_backward(model.params.encoder, trace, nll.grad.emissions, grad->encoder);
  }
  return nll.loss;
}

std::vector<Tag> tag_sentence(const Model& model, std::span<const std::string> words) {
  const Mat emissions = encode_sentence(model.params.encoder, words, Mode::Infer, 0);
  const ViterbiResult best = viterbi_decode(model.params.crf, emissions);
  std::vector<Tag> out;
  out.reserve(best.tags.size());
  for (auto idx : best.tags) out.push_back(model.tag_at(idx));
  return out;
}

Corpus tag_corpus(const Model& model, const Corpus& corpus) {
  Corpus out = corpus;
  for (auto& sentence : out) {
    const auto words = surfaces(sentence);
    const auto tags = tag_sentence(model, words);
    for (std::size_t i = 0; i < tags.size(); ++i) sentence.tokens[i].tag = tags[i];
  }
  return out;
}

}  // namespace nertk
