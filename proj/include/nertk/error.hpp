#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nertk {

/// Raised for malformed input data and violated preconditions. Carries an
/// optional 1-based line number when the failure is tied to a file position.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, std::size_t line = 0);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace nertk
