#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace nertk {

enum class TagScheme { Stanford, IOB1, IOB2 };

TagScheme parse_scheme(std::string_view name);
std::string_view scheme_name(TagScheme scheme);

enum class Position : char { B = 'B', I = 'I', O = 'O' };

/// A position marker plus an entity type. Stanford-scheme type tags are held
/// with position I; the O tag never has a type.
struct Tag {
  Position position = Position::O;
  std::string type;

  static Tag outside() { return {}; }
  static Tag begin(std::string type) { return {Position::B, std::move(type)}; }
  static Tag inside(std::string type) { return {Position::I, std::move(type)}; }

  bool is_outside() const { return position == Position::O; }

  friend bool operator==(const Tag&, const Tag&) = default;
};

/// Parses a tag string under the given scheme. Throws Error on anything the
/// scheme does not admit ("B-PER" under Stanford, "PER" under IOB2, ...).
Tag parse_tag(std::string_view text, TagScheme scheme);
std::string format_tag(const Tag& tag, TagScheme scheme);

/// Entity types are an open vocabulary: any non-empty string without
/// whitespace or '-' that is not the reserved outside marker.
bool is_valid_entity_type(std::string_view type);

struct Token {
  std::string surface;
  Tag tag;

  friend bool operator==(const Token&, const Token&) = default;
};

struct Sentence {
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
  std::vector<Tag> tags() const;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

using Corpus = std::vector<Sentence>;

/// Half-open token range [start, end) with an entity type.
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string type;

  std::size_t length() const { return end - start; }

  friend bool operator==(const EntitySpan&, const EntitySpan&) = default;
  friend auto operator<=>(const EntitySpan&, const EntitySpan&) = default;
};

std::ostream& operator<<(std::ostream& os, const EntitySpan& span);

// Corpus files: `surface<TAB>tag` per line, a blank line ends a sentence,
// lines starting with '#' are comments. Errors carry the 1-based line.
Corpus parse_corpus(std::string_view text, TagScheme scheme);
Corpus read_corpus(std::istream& in, TagScheme scheme);
Corpus read_corpus_file(const std::string& path, TagScheme scheme);

std::string write_corpus(const Corpus& corpus, TagScheme scheme);
void write_corpus_file(const std::string& path, const Corpus& corpus, TagScheme scheme);

struct TagViolation {
  std::size_t index = 0;
  std::string message;
};

std::vector<TagViolation> validate_tags(const std::vector<Tag>& tags, TagScheme scheme);
inline std::vector<TagViolation> validate_tags(const Sentence& s, TagScheme scheme) {
  return validate_tags(s.tags(), scheme);
}

std::vector<EntitySpan> extract_spans(const std::vector<Tag>& tags, TagScheme scheme);
inline std::vector<EntitySpan> extract_spans(const Sentence& s, TagScheme scheme) {
  return extract_spans(s.tags(), scheme);
}

std::vector<Tag> spans_to_tags(const std::vector<EntitySpan>& spans, std::size_t length,
                               TagScheme scheme);

struct ConversionResult {
  Corpus corpus;
  /// Stanford input only: multi-token same-type runs, each of which may hide
  /// several adjacent entities that were merged into one.
  std::size_t merged_runs = 0;
};

ConversionResult convert_scheme(const Corpus& corpus, TagScheme from, TagScheme to);

struct CorpusStats {
  std::size_t sentences = 0;
  std::size_t total_tokens = 0;
  std::size_t outside_tokens = 0;
  std::map<std::string, std::size_t> type_tokens;

  double percent(std::size_t count) const;
};

CorpusStats corpus_stats(const Corpus& corpus, TagScheme scheme);

void write_stats_text(std::ostream& os, const CorpusStats& stats);
void write_stats_kv(std::ostream& os, const CorpusStats& stats);

}  // namespace nertk
