#pragma once

#include <stdexcept>
#include <string>

namespace hssgrad {

/// Operand sizes do not agree (vector lengths, matrix shapes).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A Rayleigh quotient or curvature p^H A p came out nonpositive.
class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotHermitian : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Derived steplength quantities need two consecutive records.
class InsufficientHistory : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The estimator never produced a usable shift value.
class EstimationFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrix : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": size mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
  }
}

}  // namespace detail
}  // namespace hssgrad
