#pragma once

#include <Eigen/SVD>

#include "rank1/matrix.hpp"
#include "rank1/rng.hpp"

namespace rank1::testing {

inline DenseMatrix random_dense(Index n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  auto rng = Xoshiro256pp::stream(seed, "test-matrix");
  DenseMatrix a(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) a(i, j) = rng.uniform(lo, hi);
  return a;
}

/// Diagonally dominant, hence well conditioned.
inline DenseMatrix well_conditioned(Index n, std::uint64_t seed) {
  DenseMatrix a = random_dense(n, seed);
  for (Index i = 0; i < n; ++i) a(i, i) += double(n);
  return a;
}

inline Vector random_vector(Index n, std::uint64_t seed, std::string_view field = "test-vector") {
  auto rng = Xoshiro256pp::stream(seed, field);
  Vector x(n);
  for (auto& e : x) e = rng.uniform(-1.0, 1.0);
  return x;
}

inline Eigen::MatrixXd to_eigen(const DenseMatrix& a) {
  Eigen::MatrixXd m(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) m(Index(i), Index(j)) = a(i, j);
  return m;
}

/// Singular values from an independent SVD implementation, descending.
inline Vector singular_values(const DenseMatrix& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(a));
  const auto& s = svd.singularValues();
  return Vector(s.data(), s.data() + s.size());
}

inline double kappa2(const DenseMatrix& a) {
  const Vector s = singular_values(a);
  return s.front() / s.back();
}

inline double max_abs_diff(std::span<const double> x, std::span<const double> y) {
  double m = 0.0;
  for (Index i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

}  // namespace rank1::testing
