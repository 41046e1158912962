#pragma once

#include <stdexcept>
#include <string>

namespace qgheat {

/// Malformed input text (GRAPH files, CLI potential specs). Carries a
/// 1-based line number when the source is line-oriented.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Structurally invalid object (disconnected graph, bad mesh target, ...).
class ValidationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical failure: eigensolver non-convergence, truncation tail too large.
class NumericalError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qgheat
