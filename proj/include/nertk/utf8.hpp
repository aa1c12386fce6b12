#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nertk::utf8 {

/// Returns the byte offset of the first invalid sequence, or nullopt when the
/// whole input is well-formed UTF-8 (no overlongs, no surrogates).
std::optional<std::size_t> find_invalid(std::string_view text);

inline bool valid(std::string_view text) { return !find_invalid(text); }

/// Splits a valid UTF-8 string into its code points, each kept as its own
/// encoded byte string.
std::vector<std::string> split_chars(std::string_view text);

}  // namespace nertk::utf8
