#include "nertk/config.hpp"

#include <fstream>

#include "nertk/error.hpp"

namespace nertk {

namespace {
std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}
}  // namespace

KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw Error("expected key=value", line_no);
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw Error("empty key", line_no);
    if (kv.count(key)) throw Error("duplicate key '" + key + "'", line_no);
    kv[key] = trim(t.substr(eq + 1));
  }
  return kv;
}

KeyValues load_key_values_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path + "'");
  try {
    return parse_key_values(in);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

void write_key_values(std::ostream& os, const KeyValues& kv) {
  for (const auto& [k, v] : kv) os << k << "=" << v << "\n";
}

}  // namespace nertk
