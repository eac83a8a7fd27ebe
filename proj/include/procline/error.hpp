#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace procline {

// All recoverable failures carry a stable machine-readable code (E_SCHEMA,
// E_PARSE, E_UNBOUND, ...) next to the human-readable message.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

class ParseError : public Error {
public:
  ParseError(int line, int column, const std::string& expected)
      : Error("E_PARSE", "line " + std::to_string(line) + ", col " +
                             std::to_string(column) + ": " + expected),
        line_(line), column_(column), expected_(expected) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::string& expected() const noexcept { return expected_; }

private:
  int line_;
  int column_;
  std::string expected_;
};

// A single diagnostic produced by a validation pass. Findings are report
// content, not failures; `element` names the offending model element.
struct Finding {
  std::string code;
  std::string element;
  std::string message;

  bool operator==(const Finding&) const = default;
};

using ValidationReport = std::vector<Finding>;

}  // namespace procline
