#pragma once
#ifdef __FAST_MATH__
#error fast math enabled, this would negate compensation.
#endif

#include <cmath>
#include <span>

namespace rank1::compensated {

// s + e := a + b exactly
inline void two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  const double bb = s - a;
  e = (a - (s - bb)) + (b - bb);
}

// p + e := a * b exactly
inline void two_prod(double a, double b, double& p, double& e) {
  p = a * b;
  e = std::fma(a, b, -p);
}

/// Double-double accumulator (hi + lo). Error-free transformations on every
/// update, renormalised after each step; relative accuracy about u^2.
struct Accumulator {
  double hi = 0.0;
  double lo = 0.0;

  void add(double a) {
    double s, e;
    two_sum(hi, a, s, e);
    e += lo;
    two_sum(s, e, hi, lo);
  }

  void add(double ahi, double alo) {
    double s, e;
    two_sum(hi, ahi, s, e);
    e += lo + alo;
    two_sum(s, e, hi, lo);
  }

  void add_product(double a, double b) {
    double p, e;
    two_prod(a, b, p, e);
    add(p, e);
  }

  /// Adds (a_hi + a_lo) * b.
  void add_product(double ahi, double alo, double b) {
    double p, e;
    two_prod(ahi, b, p, e);
    add(p, e + alo * b);
  }

  double value() const { return hi + lo; }
};

/// Dot product in double-double, rounded once.
inline double dot2(std::span<const double> x, std::span<const double> y) {
  Accumulator acc;
  for (std::size_t i = 0; i < x.size(); ++i) acc.add_product(x[i], y[i]);
  return acc.value();
}

/// Dot product returned as an unevaluated double-double pair.
inline Accumulator dot2_pair(std::span<const double> x, std::span<const double> y) {
  Accumulator acc;
  for (std::size_t i = 0; i < x.size(); ++i) acc.add_product(x[i], y[i]);
  return acc;
}

}  // namespace rank1::compensated
