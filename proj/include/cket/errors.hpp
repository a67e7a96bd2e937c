#pragma once

#include <stdexcept>
#include <string>

namespace cket {

// Argument errors. Each maps to one failure class callers may want to tell
// apart (the CLI reports all of them as configuration errors).
class InputShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EmptyInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidLabelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidCandidateError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidRegularizationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidHyperparameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidPermutationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a symmetric system that should be positive definite fails to
/// factorize. Carries the smallest pivot of an LDLT of the same matrix.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double smallest_pivot)
      : std::runtime_error(what), smallest_pivot_(smallest_pivot) {}

  double smallest_pivot() const noexcept { return smallest_pivot_; }

 private:
  double smallest_pivot_;
};

}  // namespace cket
