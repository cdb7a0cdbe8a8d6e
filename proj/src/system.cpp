#include "rank1/system.hpp"

namespace rank1 {

namespace {

// Calls f(j, a_ij + u_i v_j) for every column j of row i.
template <class F>
void for_each_b_entry(const Matrix& a, const Vector& u, const Vector& v, Index i, F&& f) {
  const Index n = v.size();
  Index next = 0;
  for_each_in_row(a, i, [&](Index j, double aij) {
    for (; next < j; ++next) f(next, u[i] * v[next]);
    f(j, aij + u[i] * v[j]);
    next = j + 1;
  });
  for (; next < n; ++next) f(next, u[i] * v[next]);
}

}  // namespace

RankOneSystem::RankOneSystem(Matrix a, Vector u, Vector v, Vector b)
    : a_(std::move(a)), u_(std::move(u)), v_(std::move(v)), b_(std::move(b)) {
  const Index n = rows(a_);
  require_dims(n > 0 && cols(a_) == n, "RankOneSystem: A must be square and nonempty");
  require_dims(u_.size() == n && v_.size() == n && b_.size() == n,
               "RankOneSystem: u, v, b must have length order(A)");
  norm_a_ = norm_inf(a_);
  for (Index i = 0; i < n; ++i) {
    double s = 0.0;
    for_each_b_entry(a_, u_, v_, i, [&](Index, double bij) { s += std::abs(bij); });
    norm_b_ = std::max(norm_b_, s);
  }
}

DenseMatrix RankOneSystem::b_dense() const {
  const Index n = this->n();
  DenseMatrix b(n, n);
  for (Index i = 0; i < n; ++i)
    for_each_b_entry(a_, u_, v_, i, [&](Index j, double bij) { b(i, j) = bij; });
  return b;
}

Vector RankOneSystem::abs_b_times(std::span<const double> x) const {
  const Index n = this->n();
  require_dims(x.size() == n, "abs_b_times: dimension mismatch");
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    double s = 0.0;
    for_each_b_entry(a_, u_, v_, i, [&](Index j, double bij) { s += std::abs(bij) * std::abs(x[j]); });
    y[i] = s;
  }
  return y;
}

RankOneSystem RankOneSystem::with_rhs(Vector b) const { return RankOneSystem(a_, u_, v_, std::move(b)); }

}  // namespace rank1
