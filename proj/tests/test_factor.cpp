#include <doctest.h>

#include "rank1/factor.hpp"
#include "rank1/gallery.hpp"
#include "test_util.hpp"

using namespace rank1;
using namespace rank1::testing;

namespace {

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c(a.rows(), b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index k = 0; k < a.cols(); ++k)
      for (Index j = 0; j < b.cols(); ++j) c(i, j) += a(i, k) * b(k, j);
  return c;
}

double norm_inf(const DenseMatrix& a) { return rank1::norm_inf(Matrix(a)); }

DenseMatrix minus(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c = a;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) c(i, j) -= b(i, j);
  return c;
}

DenseMatrix permuted(const DenseMatrix& a, const std::vector<Index>& p) {
  DenseMatrix pa(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) pa(i, j) = a(p[i], j);
  return pa;
}

double residual_ratio(const Matrix& a, std::span<const double> x, std::span<const double> b) {
  const Vector ax = matvec(a, x);
  double r = 0.0;
  for (Index i = 0; i < ax.size(); ++i) r = std::max(r, std::abs(b[i] - ax[i]));
  return r / (kUnitRoundoff * rank1::norm_inf(a) * rank1::norm_inf(x));
}

}  // namespace

TEST_CASE("PLU of the identity and of a forced swap") {
  const PluFactorization f(DenseMatrix::identity(5));
  CHECK(f.lower() == DenseMatrix::identity(5));
  CHECK(f.upper() == DenseMatrix::identity(5));
  CHECK(f.pivots() == std::vector<Index>{0, 1, 2, 3, 4});

  const PluFactorization g(DenseMatrix{{0, 1}, {1, 0}});
  CHECK(g.pivots() == std::vector<Index>{1, 0});
  CHECK(g.sign() == -1);
}

TEST_CASE("PLU reconstruction and pivot growth") {
  for (Index n : {6, 20, 100}) {
    const DenseMatrix a = random_dense(n, n);
    const PluFactorization f(a);
    const DenseMatrix lu = multiply(f.lower(), f.upper());
    const double err = norm_inf(minus(permuted(a, f.pivots()), lu)) / norm_inf(a);
    CHECK(err <= 8.0 * double(n) * kUnitRoundoff);
    if (n == 6) CHECK(err <= 48.0 * kUnitRoundoff);
    const DenseMatrix l = f.lower();
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < i; ++j) CHECK(std::abs(l(i, j)) <= 1.0);
  }
}

TEST_CASE("PLU ties go to the lowest row") {
  const PluFactorization f(DenseMatrix{{1, 2, 0}, {-1, 0, 1}, {1, 1, 1}});
  CHECK(f.pivots()[0] == 0);
}

TEST_CASE("plu_solve") {
  CHECK(PluFactorization(DenseMatrix::identity(3)).solve(Vector{1, 2, 3}) == Vector{1, 2, 3});
  CHECK(PluFactorization(DenseMatrix{{2, 0}, {0, 4}}).solve(Vector{2, 4}) == Vector{1, 1});

  const DenseMatrix a = well_conditioned(8, 3);
  const Vector b = random_vector(8, 4);
  const PluFactorization f(a);
  const Vector y = f.solve(b);
  CHECK(residual_ratio(Matrix(a), y, b) <= 64.0);

  const Vector yt = f.solve_transpose(b);
  CHECK(residual_ratio(Matrix(transpose(a)), yt, b) <= 64.0);
}

TEST_CASE("exactly singular and near-singular matrices") {
  CHECK_THROWS_AS(PluFactorization(DenseMatrix{{1, 2}, {2, 4}}), ExactlySingular);
  CHECK_THROWS_AS(QrFactorization(DenseMatrix{{1, 0}, {2, 0}}), ExactlySingular);
  const PluFactorization f(DenseMatrix{{1, 0}, {0, 1e-17}});
  CHECK(f.near_singular());
  CHECK_FALSE(PluFactorization(DenseMatrix::identity(3)).near_singular());
}

TEST_CASE("banded PLU matches the dense solve and confines fill") {
  for (auto [lo, up] : {std::pair<Index, Index>{1, 1}, {2, 2}, {3, 1}, {0, 2}}) {
    const Index n = 60;
    DenseMatrix d = random_dense(n, 7 + lo + up);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (j + lo < i || i + up < j) d(i, j) = 0.0;
    const BandedMatrix b = BandedMatrix::from_dense(d, lo, up);
    const BandedPluFactorization f(b);
    const Vector rhs = random_vector(n, 5);
    const Vector x = f.solve(rhs);
    CHECK(residual_ratio(Matrix(b), x, rhs) <= 8.0 * double(n) * 100.0);
    const Vector xt = f.solve_transpose(rhs);
    CHECK(residual_ratio(Matrix(transpose(d)), xt, rhs) <= 8.0 * double(n) * 100.0);

    const DenseMatrix u = f.upper_factor();
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (j > i + lo + up) CHECK(u(i, j) == 0.0);
  }
}

TEST_CASE("factor_lu picks the band path for banded and narrow sparse storage") {
  const auto p = randsvd_banded(50, 100.0, 3, 1, 1, 1);
  CHECK(factor_lu(p.a)->kind() == SolverKind::BandedLu);
  CHECK(factor_lu(Matrix(SparseMatrix::from_dense(to_dense(p.a))))->kind() == SolverKind::BandedLu);
  CHECK(factor_lu(Matrix(to_dense(p.a)))->kind() == SolverKind::Lu);
  CHECK(factor_qr(p.a)->kind() == SolverKind::Qr);
}

TEST_CASE("QR conventions") {
  const QrFactorization id(DenseMatrix::identity(4));
  CHECK(id.r() == DenseMatrix::identity(4));
  for (double t : id.tau()) CHECK(t == 0.0);

  const QrFactorization f(DenseMatrix{{3, 4}, {4, -3}});
  const DenseMatrix r = f.r();
  CHECK(r(0, 0) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(r(1, 1) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(std::abs(r(0, 1)) <= 1e-15);
}

TEST_CASE("QR orthogonality, reconstruction and solve") {
  const Index n = 30;
  const DenseMatrix a = random_dense(n, 21);
  const QrFactorization f(a);
  const DenseMatrix q = f.q(), r = f.r();
  const DenseMatrix qtq = multiply(transpose(q), q);
  CHECK(norm_inf(minus(qtq, DenseMatrix::identity(n))) <= 8.0 * double(n) * kUnitRoundoff);
  CHECK(norms(Matrix(minus(multiply(q, r), a))).frobenius <= 8.0 * double(n) * kUnitRoundoff * norms(Matrix(a)).frobenius);
  for (Index i = 0; i < n; ++i) CHECK(r(i, i) >= 0.0);

  const Vector b = random_vector(n, 22);
  CHECK(residual_ratio(Matrix(a), f.solve(b), b) <= 8.0 * double(n));
  CHECK(residual_ratio(Matrix(transpose(a)), f.solve_transpose(b), b) <= 8.0 * double(n));
  CHECK(max_abs_diff(f.apply_q(f.apply_qt(b)), b) <= 8.0 * double(n) * kUnitRoundoff);
}

TEST_CASE("QR and PLU solves agree to kappa u") {
  for (double kappa : {1e2, 1e4, 1e6}) {
    const auto p = randsvd_banded(40, kappa, 3, 39, 39, 5);
    const DenseMatrix a = to_dense(p.a);
    const Vector b = random_vector(40, 6);
    const Vector x1 = PluFactorization(a).solve(b), x2 = QrFactorization(a).solve(b);
    CHECK(max_abs_diff(x1, x2) / rank1::norm_inf(x1) <= 1e3 * kUnitRoundoff * kappa);
  }
}

TEST_CASE("sigma_extremes") {
  const DenseMatrix d{{1, 0}, {0, 1e-6}};
  const PluFactorization fd(d);
  const SigmaExtremes s = sigma_extremes(Matrix(d), fd);
  CHECK(s.converged);
  CHECK(s.sigma_max == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(s.sigma_min == doctest::Approx(1e-6).epsilon(1e-4));

  const PluFactorization fi(DenseMatrix::identity(2));
  const SigmaExtremes si = sigma_extremes(Matrix(DenseMatrix::identity(2)), fi);
  CHECK(si.sigma_max == doctest::Approx(1.0));
  CHECK(si.sigma_min == doctest::Approx(1.0));

  const auto p = randsvd_banded(50, 1e8, 3, 49, 49, 3);
  const auto f = factor_lu(p.a);
  const SigmaExtremes g = sigma_extremes(p.a, *f);
  CHECK(g.condition() / 1e8 == doctest::Approx(1.0).epsilon(0.01));
  CHECK(g.sigma_max == doctest::Approx(p.sigma.front()).epsilon(1e-4));
  CHECK(g.sigma_min == doctest::Approx(p.sigma.back()).epsilon(1e-4));
}

TEST_CASE("sigma_extremes matches an independent SVD when converged") {
  int compared = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const DenseMatrix a = random_dense(25, seed);
    const Vector sv = singular_values(a);
    const PluFactorization f(a);
    const SigmaExtremes s = sigma_extremes(Matrix(a), f);
    if (!s.converged) continue;
    ++compared;
    CHECK(s.sigma_max == doctest::Approx(sv.front()).epsilon(1e-4));
    CHECK(s.sigma_min == doctest::Approx(sv.back()).epsilon(1e-4));
  }
  CHECK(compared >= 3);
}

TEST_CASE("sigma_extremes flags a near-singular factorization") {
  const DenseMatrix d{{1, 0}, {0, 1e-17}};
  const PluFactorization f(d);
  const SigmaExtremes s = sigma_extremes(Matrix(d), f);
  CHECK(s.near_singular);
  CHECK(s.sigma_min == 0.0);
  CHECK(std::isinf(s.condition()));
}
