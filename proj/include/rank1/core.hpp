#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace rank1 {

using Index = std::size_t;
using Vector = std::vector<double>;

/// Unit roundoff of binary64 (2^-53).
inline constexpr double kUnitRoundoff = 0x1.0p-53;

/// gamma_k = k u / (1 - k u), the usual accumulation constant.
inline double gamma(double k) {
  const double ku = k * kUnitRoundoff;
  return ku / (1.0 - ku);
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ----- errors -------------------------------------------------------------

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

/// Matrix Market or vector file could not be parsed.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  /// Prefixes a context (typically the file name), keeping the line number.
  ParseError(const std::string& context, const ParseError& inner)
      : Error(context + ": " + inner.what()), line_(inner.line_) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// A pivot was exactly zero during factorization.
class ExactlySingular : public Error {
public:
  using Error::Error;
};

/// 1 + v^T A^{-1} u is numerically zero: B is singular relative to A.
class SmBreakdown : public Error {
public:
  using Error::Error;
};

class HypothesisViolated : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

inline void require_dims(bool ok, const char* what) {
  if (!ok) throw DimensionError(what);
}

}  // namespace rank1
