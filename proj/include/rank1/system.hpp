#pragma once

#include <span>

#include "rank1/matrix.hpp"

namespace rank1 {

/// The rank-one updated system (A + u v^T) x = b with cached infinity norms
/// of A and B = A + u v^T.
class RankOneSystem {
public:
  RankOneSystem(Matrix a, Vector u, Vector v, Vector b);

  const Matrix& a() const noexcept { return a_; }
  const Vector& u() const noexcept { return u_; }
  const Vector& v() const noexcept { return v_; }
  const Vector& b() const noexcept { return b_; }
  Index n() const noexcept { return u_.size(); }

  double norm_a_inf() const noexcept { return norm_a_; }
  /// Exact row-sum norm of fl(A + u v^T), i.e. of B as it would be formed.
  double norm_b_inf() const noexcept { return norm_b_; }

  /// B = A + u v^T formed densely, entry by entry as a_ij + u_i v_j.
  DenseMatrix b_dense() const;
  /// |B| |x| with |B| taken entrywise from b_dense().
  Vector abs_b_times(std::span<const double> x) const;

  /// Same A, u, v with a different right-hand side.
  RankOneSystem with_rhs(Vector b) const;

private:
  Matrix a_;
  Vector u_, v_, b_;
  double norm_a_ = 0.0;
  double norm_b_ = 0.0;
};

}  // namespace rank1
