#pragma once

#include <stdexcept>
#include <string>

namespace transmod {

// User-facing errors (bad arguments, unreadable files, malformed formulas).
// The CLI maps these to exit code 2.
class ArgumentError : public std::runtime_error {
 public:
  explicit ArgumentError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public ArgumentError {
 public:
  explicit DataError(const std::string& msg) : ArgumentError(msg) {}
};

class FormulaError : public ArgumentError {
 public:
  FormulaError(const std::string& msg, std::size_t offset)
      : ArgumentError(msg + " (at offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class SpecificationError : public ArgumentError {
 public:
  explicit SpecificationError(const std::string& msg) : ArgumentError(msg) {}
};

// Numerical failures (infeasible parameters, non-convergence).
// The CLI maps these to exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Signals an infeasible parameter vector (h' <= 0 at an observation),
// not a crash: callers performing line searches may catch and back off.
class NonMonotoneError : public NumericError {
 public:
  explicit NonMonotoneError(const std::string& msg) : NumericError(msg) {}
};

class RoutingError : public std::runtime_error {
 public:
  explicit RoutingError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace transmod
