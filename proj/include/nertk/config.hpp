#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <string>

namespace nertk {

/// Flat `key=value` document; blank lines and `#` comments are ignored.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream& in);
KeyValues load_key_values_file(const std::string& path);
void write_key_values(std::ostream& os, const KeyValues& kv);

}  // namespace nertk
