#include "nertk/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "nertk/error.hpp"
#include "nertk/utf8.hpp"

namespace nertk {

TagScheme parse_scheme(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "stanford") return TagScheme::Stanford;
  if (lower == "iob1") return TagScheme::IOB1;
  if (lower == "iob2" || lower == "bio") return TagScheme::IOB2;
  throw Error("unknown tag scheme '" + std::string(name) + "' (expected stanford, iob1 or iob2)");
}

std::string_view scheme_name(TagScheme scheme) {
  switch (scheme) {
    case TagScheme::Stanford: return "stanford";
    case TagScheme::IOB1: return "iob1";
    case TagScheme::IOB2: return "iob2";
  }
  return "?";
}

bool is_valid_entity_type(std::string_view type) {
  if (type.empty() || type == "O") return false;
  return std::none_of(type.begin(), type.end(), [](char c) {
    return c == '-' || c == '\t' || c == ' ' || c == '\n' || c == '\r';
  });
}

Tag parse_tag(std::string_view text, TagScheme scheme) {
  if (text == "O") return Tag::outside();
  if (scheme == TagScheme::Stanford) {
    if (!is_valid_entity_type(text)) {
      throw Error("unknown tag '" + std::string(text) + "' for stanford scheme");
    }
    return Tag::inside(std::string(text));
  }
  if (text.size() < 3 || text[1] != '-' || (text[0] != 'B' && text[0] != 'I')) {
    throw Error("unknown tag '" + std::string(text) + "' for " +
                std::string(scheme_name(scheme)) + " scheme");
  }
  const std::string_view type = text.substr(2);
  if (!is_valid_entity_type(type)) {
    throw Error("invalid entity type in tag '" + std::string(text) + "'");
  }
  return {text[0] == 'B' ? Position::B : Position::I, std::string(type)};
}

std::string format_tag(const Tag& tag, TagScheme scheme) {
  if (tag.is_outside()) return "O";
  if (scheme == TagScheme::Stanford) return tag.type;
  return std::string(1, static_cast<char>(tag.position)) + "-" + tag.type;
}

std::vector<Tag> Sentence::tags() const {
  std::vector<Tag> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.tag);
  return out;
}

std::ostream& operator<<(std::ostream& os, const EntitySpan& span) {
  return os << "(" << span.start << "," << span.end << "," << span.type << ")";
}

// --- file format -----------------------------------------------------------

Corpus parse_corpus(std::string_view text, TagScheme scheme) {
  if (auto bad = utf8::find_invalid(text)) {
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(*bad), '\n');
    throw Error("invalid UTF-8 at byte " + std::to_string(*bad), static_cast<std::size_t>(line));
  }
  Corpus corpus;
  Sentence current;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;

    if (line.empty()) {
      if (!current.tokens.empty()) corpus.push_back(std::move(current));
      current = {};
      continue;
    }
    if (line.front() == '#') continue;

    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos) {
      throw Error("expected exactly two TAB-separated columns", line_no);
    }
    const std::string_view surface = line.substr(0, tab);
    if (surface.empty()) throw Error("empty token surface", line_no);
    Tag tag;
    try {
      tag = parse_tag(line.substr(tab + 1), scheme);
    } catch (const Error& e) {
      throw Error(e.what(), line_no);
    }
    current.tokens.push_back({std::string(surface), std::move(tag)});
  }
  if (!current.tokens.empty()) corpus.push_back(std::move(current));
  return corpus;
}

Corpus read_corpus(std::istream& in, TagScheme scheme) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_corpus(buf.str(), scheme);
}

Corpus read_corpus_file(const std::string& path, TagScheme scheme) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file '" + path + "'");
  try {
    return read_corpus(in, scheme);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

std::string write_corpus(const Corpus& corpus, TagScheme scheme) {
  std::string out;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const auto& sentence = corpus[s];
    const auto violations = validate_tags(sentence, scheme);
    if (!violations.empty()) {
      throw Error("sentence " + std::to_string(s) + ", token " +
                  std::to_string(violations.front().index) + ": " + violations.front().message);
    }
    for (std::size_t t = 0; t < sentence.tokens.size(); ++t) {
      const auto& token = sentence.tokens[t];
      if (token.surface.empty() || token.surface.find_first_of("\t\n") != std::string::npos) {
        throw Error("sentence " + std::to_string(s) + ", token " + std::to_string(t) +
                    ": surface is empty or contains a separator");
      }
      out += token.surface;
      out += '\t';
      out += format_tag(token.tag, scheme);
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

void write_corpus_file(const std::string& path, const Corpus& corpus, TagScheme scheme) {
  const std::string text = write_corpus(corpus, scheme);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write corpus file '" + path + "'");
  out << text;
}

// --- tag sequences -----------------------------------------------------------

std::vector<TagViolation> validate_tags(const std::vector<Tag>& tags, TagScheme scheme) {
  std::vector<TagViolation> out;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const Tag& tag = tags[i];
    if (!tag.is_outside() && !is_valid_entity_type(tag.type)) {
      out.push_back({i, "invalid entity type '" + tag.type + "'"});
      continue;
    }
    if (tag.is_outside() && !tag.type.empty()) {
      out.push_back({i, "O tag carries a type"});
      continue;
    }
    const Tag* prev = i > 0 ? &tags[i - 1] : nullptr;
    const bool prev_same_type = prev && !prev->is_outside() && prev->type == tag.type;
    switch (scheme) {
      case TagScheme::Stanford:
        if (tag.position == Position::B) out.push_back({i, "B marker under stanford scheme"});
        break;
      case TagScheme::IOB1:
        if (tag.position == Position::B && !prev_same_type) {
          out.push_back({i, "B-" + tag.type + " does not follow an entity of the same type"});
        }
        break;
      case TagScheme::IOB2:
        if (tag.position == Position::I && !prev_same_type) {
          out.push_back({i, "I-" + tag.type + " does not continue a " + tag.type + " entity"});
        }
        break;
    }
  }
  return out;
}

std::vector<EntitySpan> extract_spans(const std::vector<Tag>& tags, TagScheme scheme) {
  const auto violations = validate_tags(tags, scheme);
  if (!violations.empty()) {
    throw Error("invalid tag sequence at token " + std::to_string(violations.front().index) +
                ": " + violations.front().message);
  }
  std::vector<EntitySpan> spans;
  bool open = false;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const Tag& tag = tags[i];
    if (tag.is_outside()) {
      open = false;
      continue;
    }
    bool starts = !open || spans.back().type != tag.type;
    if (tag.position == Position::B) starts = true;
    if (starts) {
      spans.push_back({i, i + 1, tag.type});
      open = true;
    } else {
      spans.back().end = i + 1;
    }
  }
  return spans;
}

std::vector<Tag> spans_to_tags(const std::vector<EntitySpan>& spans, std::size_t length,
                               TagScheme scheme) {
  std::vector<EntitySpan> sorted = spans;
  std::sort(sorted.begin(), sorted.end());
  std::vector<Tag> tags(length);
  std::size_t covered_to = 0;
  const EntitySpan* prev = nullptr;
  for (const auto& span : sorted) {
    if (span.start >= span.end || span.end > length) {
      std::ostringstream msg;
      msg << "span " << span << " out of bounds for length " << length;
      throw Error(msg.str());
    }
    if (!is_valid_entity_type(span.type)) throw Error("invalid entity type '" + span.type + "'");
    if (prev && span.start < covered_to) {
      std::ostringstream msg;
      msg << "overlapping spans " << *prev << " and " << span;
      throw Error(msg.str());
    }
    const bool touches_same_type = prev && prev->end == span.start && prev->type == span.type;
    Position first = Position::I;
    if (scheme == TagScheme::IOB2 || (scheme == TagScheme::IOB1 && touches_same_type)) {
      first = Position::B;
    }
    tags[span.start] = {first, span.type};
    for (std::size_t i = span.start + 1; i < span.end; ++i) tags[i] = Tag::inside(span.type);
    covered_to = span.end;
    prev = &span;
  }
  return tags;
}

ConversionResult convert_scheme(const Corpus& corpus, TagScheme from, TagScheme to) {
  ConversionResult result;
  result.corpus.reserve(corpus.size());
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const Sentence& in = corpus[s];
    std::vector<EntitySpan> spans;
    try {
      spans = extract_spans(in, from);
    } catch (const Error& e) {
      throw Error("sentence " + std::to_string(s) + ": " + e.what());
    }
    if (from == TagScheme::Stanford) {
      result.merged_runs += static_cast<std::size_t>(
          std::count_if(spans.begin(), spans.end(), [](const EntitySpan& sp) { return sp.length() > 1; }));
    }
    const auto tags = spans_to_tags(spans, in.size(), to);
    Sentence out = in;
    for (std::size_t i = 0; i < tags.size(); ++i) out.tokens[i].tag = tags[i];
    result.corpus.push_back(std::move(out));
  }
  return result;
}

// --- statistics --------------------------------------------------------------

double CorpusStats::percent(std::size_t count) const {
  if (total_tokens == 0) return 0.0;
  return 100.0 * static_cast<double>(count) / static_cast<double>(total_tokens);
}

CorpusStats corpus_stats(const Corpus& corpus, TagScheme scheme) {
  CorpusStats stats;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const auto violations = validate_tags(corpus[s], scheme);
    if (!violations.empty()) {
      throw Error("sentence " + std::to_string(s) + ", token " +
                  std::to_string(violations.front().index) + ": " + violations.front().message);
    }
    ++stats.sentences;
    for (const auto& token : corpus[s].tokens) {
      ++stats.total_tokens;
      if (token.tag.is_outside()) {
        ++stats.outside_tokens;
      } else {
        ++stats.type_tokens[token.tag.type];
      }
    }
  }
  return stats;
}

void write_stats_text(std::ostream& os, const CorpusStats& stats) {
  const auto row = [&](const std::string& name, std::size_t count) {
    os << std::left << std::setw(16) << name << std::right << std::setw(10) << count
       << std::setw(9) << std::fixed << std::setprecision(2) << stats.percent(count) << "%\n";
  };
  os << std::left << std::setw(16) << "Entity Type" << std::right << std::setw(10) << "Tokens"
     << std::setw(10) << "Percent" << "\n";
  for (const auto& [type, count] : stats.type_tokens) row(type, count);
  row("O", stats.outside_tokens);
  row("Total", stats.total_tokens);
  os << "Sentences: " << stats.sentences << "\n";
}

void write_stats_kv(std::ostream& os, const CorpusStats& stats) {
  os << "sentences=" << stats.sentences << "\n";
  os << "tokens=" << stats.total_tokens << "\n";
  os << std::fixed << std::setprecision(4);
  for (const auto& [type, count] : stats.type_tokens) {
    os << "count." << type << "=" << count << "\n";
    os << "percent." << type << "=" << stats.percent(count) << "\n";
  }
  os << "count.O=" << stats.outside_tokens << "\n";
  os << "percent.O=" << stats.percent(stats.outside_tokens) << "\n";
}

}  // namespace nertk
