#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wlra {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// An iterative kernel failed to converge, or a factorization that must
/// succeed did not.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// QR found |r_ii| below the rank tolerance. `index()` is the first such
/// column, `indices()` all of them.
class RankDeficientError : public NumericError {
 public:
  explicit RankDeficientError(std::vector<std::ptrdiff_t> indices)
      : NumericError("rank-deficient input: |r_ii| below tolerance at column " +
                     std::to_string(indices.empty() ? -1 : indices.front())),
        indices_(std::move(indices)) {}

  std::ptrdiff_t index() const { return indices_.empty() ? -1 : indices_.front(); }
  const std::vector<std::ptrdiff_t>& indices() const { return indices_; }

 private:
  std::vector<std::ptrdiff_t> indices_;
};

/// RPCA residual stopped decreasing.
class DivergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Invalid user configuration (scene geometry, experiment sizes, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. `line()` is 1-based, 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace wlra
