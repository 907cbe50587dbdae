#pragma once

#include <stdexcept>
#include <string>

namespace deviatile {

// Bad input: parameters outside their domain, malformed configs, etc.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An iterative numerical routine did not reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The model lacks the moment a risk measure needs (infinite mean/variance).
class MomentError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A tail estimator is not applicable to the fitted tail index, e.g. the
// deviatile estimator when the Hill estimate is >= 1/2. Callers may retry
// with a different threshold.
class EstimationFailure : public std::runtime_error {
 public:
  EstimationFailure(const std::string& what, double gamma_hat)
      : std::runtime_error(what), gamma_hat_(gamma_hat) {}
  double gamma_hat() const noexcept { return gamma_hat_; }

 private:
  double gamma_hat_;
};

// Input file problems. line() is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace deviatile
