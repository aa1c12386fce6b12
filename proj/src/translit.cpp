#include "nertk/translit.hpp"

#include <fstream>
#include <sstream>

#include "nertk/error.hpp"
#include "nertk/utf8.hpp"

namespace nertk {

TranslitTable TranslitTable::parse(std::string_view text) {
  if (auto bad = utf8::find_invalid(text)) {
    throw Error("transliteration table: invalid UTF-8 at byte " + std::to_string(*bad));
  }
  TranslitTable table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw Error("expected `char<TAB>latin`", line_no);
    const std::string_view ch = line.substr(0, tab);
    const std::string_view latin = line.substr(tab + 1);
    if (utf8::split_chars(ch).size() != 1) {
      throw Error("first column must be a single character", line_no);
    }
    if (table.find(ch)) throw Error("duplicate entry for '" + std::string(ch) + "'", line_no);
    table.add(std::string(ch), std::string(latin));
  }
  return table;
}

TranslitTable TranslitTable::load(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

TranslitTable TranslitTable::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open transliteration table '" + path + "'");
  return load(in);
}

void TranslitTable::add(std::string character, std::string latin) {
  mapping_[std::move(character)] = std::move(latin);
}

const std::string* TranslitTable::find(std::string_view character) const {
  const auto it = mapping_.find(std::string(character));
  return it == mapping_.end() ? nullptr : &it->second;
}

TranslitResult transliterate(std::string_view text, const TranslitTable& table) {
  TranslitResult result;
  result.text.reserve(text.size());
  for (const auto& ch : utf8::split_chars(text)) {
    if (const std::string* latin = table.find(ch)) {
      result.text += *latin;
      ++result.mapped;
    } else {
      result.text += ch;
      ++result.unmapped;
    }
  }
  return result;
}

}  // namespace nertk
