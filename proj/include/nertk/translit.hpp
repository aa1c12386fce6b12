#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <unordered_map>

namespace nertk {

/// Character-to-Latin mapping loaded from a `char<TAB>latin` table. Several
/// characters may map to the same string, which is how orthographic variants
/// are collapsed (and how plain normalization tables are expressed).
class TranslitTable {
 public:
  static TranslitTable parse(std::string_view text);
  static TranslitTable load(std::istream& in);
  static TranslitTable load_file(const std::string& path);

  void add(std::string character, std::string latin);
  const std::string* find(std::string_view character) const;
  std::size_t size() const { return mapping_.size(); }

 private:
  std::unordered_map<std::string, std::string> mapping_;
};

struct TranslitResult {
  std::string text;
  std::size_t mapped = 0;
  std::size_t unmapped = 0;  ///< characters passed through verbatim
};

TranslitResult transliterate(std::string_view text, const TranslitTable& table);

}  // namespace nertk
