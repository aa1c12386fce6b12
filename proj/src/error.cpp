#include "nertk/error.hpp"

namespace nertk {

namespace {
std::string with_line(const std::string& what, std::size_t line) {
  if (line == 0) return what;
  return "line " + std::to_string(line) + ": " + what;
}
}  // namespace

Error::Error(const std::string& what, std::size_t line)
    : std::runtime_error(with_line(what, line)), line_(line) {}

}  // namespace nertk
