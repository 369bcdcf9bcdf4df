#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace courtphase {

using PlayerId = int;
using TimestampMs = std::int64_t;
using ClusterId = std::uint32_t;

/// Number of players on court for one team; the feature space is defined for exactly this many.
inline constexpr std::size_t kTeamSize = 5;
/// C(5,2) pairwise distances per instant.
inline constexpr std::size_t kPairCount = kTeamSize * (kTeamSize - 1) / 2;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct Court {
  double length = 28.0;  // meters, along x
  double width = 15.0;   // meters, along y
};

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration (bad parameters, wrong roster size, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data that violates an operation's preconditions.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input (records, exported tables, config files).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Read-only row-major view over a dense matrix of doubles.
class DataView {
 public:
  DataView() = default;
  DataView(std::span<const double> values, std::size_t rows, std::size_t cols)
      : values_(values), rows_(rows), cols_(cols) {
    if (values.size() != rows * cols) {
      throw InputError("DataView: buffer size " + std::to_string(values.size()) +
                       " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const double> values() const { return values_; }
  std::span<const double> row(std::size_t i) const { return values_.subspan(i * cols_, cols_); }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

 private:
  std::span<const double> values_;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
};

}  // namespace courtphase
