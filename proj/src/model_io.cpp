#include "nertk/model_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "nertk/error.hpp"

namespace nertk {

namespace {

constexpr const char* kMagic = "NERTK-MODEL 1";

std::string mask_digits(const std::vector<char>& bits) {
  std::string s;
  s.reserve(bits.size());
  for (char b : bits) s += b ? '1' : '0';
  return s;
}

std::vector<char> parse_digits(const std::string& s, std::size_t expected) {
  if (s.size() != expected) throw Error("mask has " + std::to_string(s.size()) + " entries, expected " + std::to_string(expected));
  std::vector<char> out;
  out.reserve(s.size());
  for (char c : s) {
    if (c != '0' && c != '1') throw Error("mask entries must be 0 or 1");
    out.push_back(c == '1' ? 1 : 0);
  }
  return out;
}

void write_le(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  char bytes[8];
  for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  out.write(bytes, 8);
}

double read_le(const unsigned char* bytes) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

std::string read_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw Error(std::string("model file truncated while reading ") + what);
  return line;
}

std::vector<std::string> read_list(std::istream& in, const std::string& header, const char* key) {
  std::istringstream h(header);
  std::string word;
  long long n = -1;
  if (!(h >> word >> n) || word != key || n < 0) throw Error(std::string("expected `") + key + " <count>`");
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) out.push_back(read_line(in, key));
  return out;
}

}  // namespace

void save_model(std::ostream& out, const Model& model) {
  std::ostringstream manifest;
  manifest << kMagic << "\n";
  for (const auto& [key, value] : model.metadata) {
    if (key.find_first_of(" \t\n") != std::string::npos || value.find('\n') != std::string::npos) {
      throw Error("metadata entry '" + key + "' cannot be stored");
    }
    manifest << "meta " << key << " " << value << "\n";
  }
  manifest << "dims " << model.dims.char_dim << " " << model.dims.char_hidden << " "
           << model.dims.word_dim << " " << model.dims.word_hidden << "\n";
  manifest << "dropout " << std::setprecision(17) << model.params.encoder.dropout << "\n";
  manifest << "tags " << model.tags.size() << "\n";
  for (const auto& t : model.tags) manifest << t << "\n";
  const auto& chars = model.params.encoder.chars.vocab->entries();
  manifest << "char_vocab " << chars.size() << "\n";
  for (const auto& c : chars) manifest << c << "\n";
  const auto& words = model.params.encoder.words.vocab->entries();
  manifest << "word_vocab " << words.size() << "\n";
  for (const auto& w : words) manifest << w << "\n";
  const auto& mask = model.params.crf.mask;
  manifest << "mask " << mask_digits(mask.transition) << " " << mask_digits(mask.start) << " "
           << mask_digits(mask.end) << "\n";
  const auto views = tensors(model.params);
  std::size_t offset = 0;
  for (const auto& t : views) {
    manifest << "tensor " << t.name << " " << t.data.rows() << " " << t.data.cols() << " " << offset << "\n";
    offset += static_cast<std::size_t>(t.data.size()) * 8;
  }
  manifest << "end\n";
  out << manifest.str();
  for (const auto& t : views) {
    for (Eigen::Index r = 0; r < t.data.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.data.cols(); ++c) write_le(out, t.data(r, c));
    }
  }
  if (!out) throw Error("failed writing model");
}

void save_model_file(const std::string& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file '" + path + "'");
  save_model(out, model);
}

Model load_model(std::istream& in) {
  if (read_line(in, "header") != kMagic) throw Error("not a model file (bad magic line)");
  Model m;
  std::string line = read_line(in, "manifest");
  while (line.rfind("meta ", 0) == 0) {
    const auto space = line.find(' ', 5);
    if (space == std::string::npos) throw Error("malformed meta line");
    m.metadata[line.substr(5, space - 5)] = line.substr(space + 1);
    line = read_line(in, "manifest");
  }
  {
    std::istringstream d(line);
    std::string key;
    if (!(d >> key >> m.dims.char_dim >> m.dims.char_hidden >> m.dims.word_dim >> m.dims.word_hidden) || key != "dims") {
      throw Error("expected `dims` line");
    }
  }
  double dropout = 0.0;
  {
    std::istringstream d(read_line(in, "dropout"));
    std::string key;
    if (!(d >> key >> dropout) || key != "dropout") throw Error("expected `dropout` line");
  }
  m.tags = read_list(in, read_line(in, "tags"), "tags");
  auto char_vocab = std::make_shared<Vocabulary>(read_list(in, read_line(in, "char_vocab"), "char_vocab"));
  auto word_vocab = std::make_shared<Vocabulary>(read_list(in, read_line(in, "word_vocab"), "word_vocab"));

  const std::size_t K = m.tags.size();
  const auto cd = static_cast<Eigen::Index>(m.dims.char_dim);
  const auto ch = static_cast<Eigen::Index>(m.dims.char_hidden);
  const auto wd = static_cast<Eigen::Index>(m.dims.word_dim);
  const auto wh = static_cast<Eigen::Index>(m.dims.word_hidden);
  auto& enc = m.params.encoder;
  enc.dropout = dropout;
  enc.chars = {char_vocab, Mat::Zero(static_cast<Eigen::Index>(char_vocab->size()), cd), Vec::Zero(cd)};
  enc.char_bilstm = BiLstmParams::zeros(cd, ch);
  enc.words = {word_vocab, Mat::Zero(static_cast<Eigen::Index>(word_vocab->size()), wd), Vec::Zero(wd)};
  enc.word_bilstm = BiLstmParams::zeros(wd + 2 * ch, wh);
  enc.projection = Mat::Zero(2 * wh, static_cast<Eigen::Index>(K));
  enc.projection_bias = Vec::Zero(static_cast<Eigen::Index>(K));
  m.params.crf = CrfParams::zeros(K);
  {
    std::istringstream d(read_line(in, "mask"));
    std::string key, trans, start, end;
    if (!(d >> key >> trans >> start >> end) || key != "mask") throw Error("expected `mask` line");
    m.params.crf.mask = {parse_digits(trans, K * K), parse_digits(start, K), parse_digits(end, K)};
  }

  auto views = tensors(m.params);
  std::size_t total = 0;
  for (auto& t : views) {
    std::istringstream d(read_line(in, "tensor"));
    std::string key, name;
    long long rows = -1, cols = -1;
    std::size_t offset = 0;
    if (!(d >> key >> name >> rows >> cols >> offset) || key != "tensor") throw Error("expected `tensor` line for " + t.name);
    if (name != t.name || rows != t.data.rows() || cols != t.data.cols() || offset != total) {
      throw Error("tensor entry '" + name + "' does not match expected " + t.name + " " +
                  std::to_string(t.data.rows()) + "x" + std::to_string(t.data.cols()));
    }
    total += static_cast<std::size_t>(t.data.size()) * 8;
  }
  if (read_line(in, "end") != "end") throw Error("expected `end` after tensor table");

  std::vector<unsigned char> blob(total);
  in.read(reinterpret_cast<char*>(blob.data()), static_cast<std::streamsize>(total));
  if (static_cast<std::size_t>(in.gcount()) != total) throw Error("model file truncated in tensor data");
  if (in.peek() != std::char_traits<char>::eof()) throw Error("trailing bytes after tensor data");
  std::size_t pos = 0;
  for (auto& t : views) {
    for (Eigen::Index r = 0; r < t.data.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.data.cols(); ++c) {
        t.data(r, c) = read_le(blob.data() + pos);
        pos += 8;
      }
    }
  }
  return m;
}

Model load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file '" + path + "'");
  try {
    return load_model(in);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

}  // namespace nertk
