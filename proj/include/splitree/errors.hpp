#ifndef SPLITREE_ERRORS_HPP
#define SPLITREE_ERRORS_HPP

#include <stdexcept>

namespace splitree {

/// Malformed or incomplete configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine failed to converge (CLI exit code 2).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Model parameters violate the hypotheses an operation needs (CLI exit code 3).
class HypothesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace splitree

#endif  // SPLITREE_ERRORS_HPP
