#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tqd {

/// Base of every error thrown by the library. `code()` is a stable,
/// machine-readable tag used by the CLI's JSON error objects.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string &message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string &code() const noexcept { return code_; }

private:
  std::string code_;
};

/// Bad argument: index out of range, negative exchange, malformed config.
class UsageError : public Error {
public:
  explicit UsageError(const std::string &message) : Error("usage", message) {}
};

class DegenerateInputError : public Error {
public:
  explicit DegenerateInputError(const std::string &message)
      : Error("degenerate_input", message) {}
};

/// A checked precondition on an operator (hermiticity, m_z conservation).
class ContractViolation : public Error {
public:
  explicit ContractViolation(const std::string &message)
      : Error("contract_violation", message) {}
};

class NumericError : public Error {
public:
  NumericError(const std::string &message, std::string diagnostics)
      : Error("numeric", message), diagnostics_(std::move(diagnostics)) {}

  const std::string &diagnostics() const noexcept { return diagnostics_; }

private:
  std::string diagnostics_;
};

class UnderDeterminedError : public Error {
public:
  UnderDeterminedError(const std::string &message,
                       std::vector<std::string> admissible_completions)
      : Error("under_determined", message),
        completions_(std::move(admissible_completions)) {}

  /// Measurement kinds that, added to the given set, would make it solvable.
  const std::vector<std::string> &admissible_completions() const noexcept {
    return completions_;
  }

private:
  std::vector<std::string> completions_;
};

} // namespace tqd
