#include "nertk/utf8.hpp"

namespace nertk::utf8 {

namespace {

// Length of the sequence starting at `lead`, or 0 for an invalid lead byte.
std::size_t sequence_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if (lead >= 0xC2 && lead <= 0xDF) return 2;
  if (lead >= 0xE0 && lead <= 0xEF) return 3;
  if (lead >= 0xF0 && lead <= 0xF4) return 4;
  return 0;
}

bool is_continuation(unsigned char b) { return (b & 0xC0) == 0x80; }

}  // namespace

std::optional<std::size_t> find_invalid(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    const std::size_t len = sequence_length(lead);
    if (len == 0 || i + len > text.size()) return i;
    for (std::size_t k = 1; k < len; ++k) {
      if (!is_continuation(static_cast<unsigned char>(text[i + k]))) return i;
    }
    if (len >= 3) {
      const auto second = static_cast<unsigned char>(text[i + 1]);
      if (lead == 0xE0 && second < 0xA0) return i;  // overlong
      if (lead == 0xED && second > 0x9F) return i;  // surrogate
      if (lead == 0xF0 && second < 0x90) return i;  // overlong
      if (lead == 0xF4 && second > 0x8F) return i;  // > U+10FFFF
    }
    i += len;
  }
  return std::nullopt;
}

std::vector<std::string> split_chars(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t len = sequence_length(static_cast<unsigned char>(text[i]));
    if (len == 0 || i + len > text.size()) len = 1;
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

}  // namespace nertk::utf8
