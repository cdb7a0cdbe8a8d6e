#include "rank1/factor.hpp"

#include <algorithm>
#include <cmath>

#include "rank1/rng.hpp"

namespace rank1 {

std::string_view to_string(SolverKind k) {
  switch (k) {
    case SolverKind::Lu: return "LU";
    case SolverKind::BandedLu: return "banded-LU";
    case SolverKind::Qr: return "QR";
  }
  return "?";
}

// ----- dense PLU -------------------------------------------------------------

PluFactorization::PluFactorization(DenseMatrix a) : lu_(std::move(a)) {
  require_dims(lu_.rows() == lu_.cols() && lu_.rows() > 0, "plu_factor: matrix must be square and nonempty");
  const Index n = lu_.rows();
  const double anorm = norm_inf(Matrix(lu_));
  pivots_.resize(n);
  for (Index i = 0; i < n; ++i) pivots_[i] = i;
  min_pivot_ = kInf;

  for (Index k = 0; k < n; ++k) {
    // first row attaining the maximum wins ties
    Index p = k;
    double best = std::abs(lu_(k, k));
    for (Index i = k + 1; i < n; ++i)
      if (std::abs(lu_(i, k)) > best) {
        best = std::abs(lu_(i, k));
        p = i;
      }
    if (best == 0.0) throw ExactlySingular("plu_factor: zero pivot in column " + std::to_string(k));
    if (p != k) {
      std::swap_ranges(lu_.row(k).begin(), lu_.row(k).end(), lu_.row(p).begin());
      std::swap(pivots_[k], pivots_[p]);
      sign_ = -sign_;
    }
    min_pivot_ = std::min(min_pivot_, best);
    const double piv = lu_(k, k);
    const auto rk = lu_.row(k);
    for (Index i = k + 1; i < n; ++i) {
      auto ri = lu_.row(i);
      if (ri[k] == 0.0) continue;
      const double l = ri[k] / piv;
      ri[k] = l;
      for (Index j = k + 1; j < n; ++j) ri[j] -= l * rk[j];
    }
  }
  near_singular_ = min_pivot_ < double(n) * kUnitRoundoff * anorm;
}

Vector PluFactorization::solve(std::span<const double> b) const {
  const Index n = order();
  require_dims(b.size() == n, "plu_solve: dimension mismatch");
  Vector x(n);
  for (Index i = 0; i < n; ++i) {
    double s = b[pivots_[i]];
    const auto r = lu_.row(i);
    for (Index j = 0; j < i; ++j) s -= r[j] * x[j];
    x[i] = s;
  }
  for (Index i = n; i-- > 0;) {
    double s = x[i];
    const auto r = lu_.row(i);
    for (Index j = i + 1; j < n; ++j) s -= r[j] * x[j];
    x[i] = s / r[i];
  }
  return x;
}

Vector PluFactorization::solve_transpose(std::span<const double> b) const {
  const Index n = order();
  require_dims(b.size() == n, "plu_solve_transpose: dimension mismatch");
  // A^T = U^T L^T P
  Vector w(b.begin(), b.end());
  for (Index i = 0; i < n; ++i) {
    double s = w[i];
    for (Index j = 0; j < i; ++j) s -= lu_(j, i) * w[j];
    w[i] = s / lu_(i, i);
  }
  for (Index i = n; i-- > 0;) {
    double s = w[i];
    for (Index j = i + 1; j < n; ++j) s -= lu_(j, i) * w[j];
    w[i] = s;
  }
  Vector x(n);
  for (Index i = 0; i < n; ++i) x[pivots_[i]] = w[i];
  return x;
}

DenseMatrix PluFactorization::lower() const {
  const Index n = order();
  DenseMatrix l(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < i; ++j) l(i, j) = lu_(i, j);
    l(i, i) = 1.0;
  }
  return l;
}

DenseMatrix PluFactorization::upper() const {
  const Index n = order();
  DenseMatrix u(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) u(i, j) = lu_(i, j);
  return u;
}

// ----- banded PLU ------------------------------------------------------------

BandedPluFactorization::BandedPluFactorization(const BandedMatrix& a)
    : n_(a.order()), kl_(a.lower()), ku_(a.upper()), kv_(a.lower() + a.upper()),
      ldab_(2 * a.lower() + a.upper() + 1), ab_(ldab_ * a.order(), 0.0), ipiv_(a.order()) {
  for (Index i = 0; i < n_; ++i) a.for_each_in_row(i, [&](Index j, double v) { at(i, j) = v; });
  const double anorm = norm_inf(Matrix(a));
  double min_pivot = kInf;

  Index ju = 0;
  for (Index j = 0; j < n_; ++j) {
    const Index km = std::min(kl_, n_ - 1 - j);
    Index jp = 0;
    double best = std::abs(at(j, j));
    for (Index i = 1; i <= km; ++i)
      if (std::abs(at(j + i, j)) > best) {
        best = std::abs(at(j + i, j));
        jp = i;
      }
    ipiv_[j] = j + jp;
    if (best == 0.0) throw ExactlySingular("banded plu: zero pivot in column " + std::to_string(j));
    min_pivot = std::min(min_pivot, best);
    ju = std::max(ju, std::min(j + ku_ + jp, n_ - 1));
    if (jp != 0)
      for (Index c = j; c <= ju; ++c) std::swap(at(j, c), at(j + jp, c));
    if (km > 0) {
      const double piv = at(j, j);
      for (Index i = 1; i <= km; ++i) at(j + i, j) /= piv;
      for (Index c = j + 1; c <= ju; ++c) {
        const double t = at(j, c);
        if (t == 0.0) continue;
        for (Index i = 1; i <= km; ++i) at(j + i, c) -= at(j + i, j) * t;
      }
    }
  }
  near_singular_ = min_pivot < double(n_) * kUnitRoundoff * anorm;
}

Vector BandedPluFactorization::solve(std::span<const double> b) const {
  require_dims(b.size() == n_, "banded plu solve: dimension mismatch");
  Vector x(b.begin(), b.end());
  for (Index j = 0; j < n_; ++j) {
    const Index km = std::min(kl_, n_ - 1 - j);
    if (ipiv_[j] != j) std::swap(x[j], x[ipiv_[j]]);
    for (Index i = 1; i <= km; ++i) x[j + i] -= at(j + i, j) * x[j];
  }
  for (Index i = n_; i-- > 0;) {
    double s = x[i];
    const Index hi = std::min(n_ - 1, i + kv_);
    for (Index c = i + 1; c <= hi; ++c) s -= at(i, c) * x[c];
    x[i] = s / at(i, i);
  }
  return x;
}

Vector BandedPluFactorization::solve_transpose(std::span<const double> b) const {
  require_dims(b.size() == n_, "banded plu solve_transpose: dimension mismatch");
  Vector x(b.begin(), b.end());
  for (Index i = 0; i < n_; ++i) {
    double s = x[i];
    const Index lo = i > kv_ ? i - kv_ : 0;
    for (Index c = lo; c < i; ++c) s -= at(c, i) * x[c];
    x[i] = s / at(i, i);
  }
  for (Index j = n_; j-- > 0;) {
    const Index km = std::min(kl_, n_ - 1 - j);
    double s = x[j];
    for (Index i = 1; i <= km; ++i) s -= at(j + i, j) * x[j + i];
    x[j] = s;
    if (ipiv_[j] != j) std::swap(x[j], x[ipiv_[j]]);
  }
  return x;
}

DenseMatrix BandedPluFactorization::upper_factor() const {
  DenseMatrix u(n_, n_);
  for (Index i = 0; i < n_; ++i)
    for (Index c = i; c <= std::min(n_ - 1, i + kv_); ++c) u(i, c) = at(i, c);
  return u;
}

// ----- Householder QR --------------------------------------------------------

QrFactorization::QrFactorization(DenseMatrix a) : qr_(std::move(a)) {
  require_dims(qr_.rows() == qr_.cols() && qr_.rows() > 0, "qr_factor: matrix must be square and nonempty");
  const Index n = qr_.rows();
  tau_.assign(n, 0.0);
  Vector col(n);

  for (Index k = 0; k < n; ++k) {
    const double alpha = qr_(k, k);
    for (Index i = k + 1; i < n; ++i) col[i] = qr_(i, k);
    const double xnorm = norm_2(std::span<const double>(col.data() + k + 1, n - k - 1));

    if (xnorm == 0.0) {
      if (alpha >= 0.0) continue;  // already has a nonnegative diagonal
      // H = I - 2 e1 e1^T flips the sign
      tau_[k] = 2.0;
      for (Index j = k; j < n; ++j) qr_(k, j) = -qr_(k, j);
      continue;
    }

    const double beta = std::hypot(alpha, xnorm);
    // v0 = alpha - beta without cancellation when alpha > 0
    const double v0 = alpha <= 0.0 ? alpha - beta : -xnorm * (xnorm / (alpha + beta));
    const double v0sq = v0 * v0;
    tau_[k] = 2.0 * v0sq / (v0sq + xnorm * xnorm);
    for (Index i = k + 1; i < n; ++i) qr_(i, k) = col[i] / v0;
    qr_(k, k) = beta;

    for (Index j = k + 1; j < n; ++j) {
      double w = qr_(k, j);
      for (Index i = k + 1; i < n; ++i) w += qr_(i, k) * qr_(i, j);
      w *= tau_[k];
      qr_(k, j) -= w;
      for (Index i = k + 1; i < n; ++i) qr_(i, j) -= w * qr_(i, k);
    }
  }
  for (Index k = 0; k < n; ++k)
    if (qr_(k, k) == 0.0) throw ExactlySingular("qr_factor: R has a zero diagonal entry at " + std::to_string(k));
}

Vector QrFactorization::apply_qt(std::span<const double> b) const {
  const Index n = order();
  Vector x(b.begin(), b.end());
  for (Index k = 0; k < n; ++k) {
    if (tau_[k] == 0.0) continue;
    double w = x[k];
    for (Index i = k + 1; i < n; ++i) w += qr_(i, k) * x[i];
    w *= tau_[k];
    x[k] -= w;
    for (Index i = k + 1; i < n; ++i) x[i] -= w * qr_(i, k);
  }
  return x;
}

Vector QrFactorization::apply_q(std::span<const double> b) const {
  const Index n = order();
  Vector x(b.begin(), b.end());
  for (Index k = n; k-- > 0;) {
    if (tau_[k] == 0.0) continue;
    double w = x[k];
    for (Index i = k + 1; i < n; ++i) w += qr_(i, k) * x[i];
    w *= tau_[k];
    x[k] -= w;
    for (Index i = k + 1; i < n; ++i) x[i] -= w * qr_(i, k);
  }
  return x;
}

Vector QrFactorization::solve(std::span<const double> b) const {
  const Index n = order();
  require_dims(b.size() == n, "qr_solve: dimension mismatch");
  Vector x = apply_qt(b);
  for (Index i = n; i-- > 0;) {
    double s = x[i];
    for (Index j = i + 1; j < n; ++j) s -= qr_(i, j) * x[j];
    x[i] = s / qr_(i, i);
  }
  return x;
}

Vector QrFactorization::solve_transpose(std::span<const double> b) const {
  const Index n = order();
  require_dims(b.size() == n, "qr_solve_transpose: dimension mismatch");
  // A^T = R^T Q^T
  Vector y(b.begin(), b.end());
  for (Index i = 0; i < n; ++i) {
    double s = y[i];
    for (Index j = 0; j < i; ++j) s -= qr_(j, i) * y[j];
    y[i] = s / qr_(i, i);
  }
  return apply_q(y);
}

DenseMatrix QrFactorization::q() const {
  const Index n = order();
  DenseMatrix q(n, n);
  Vector e(n, 0.0);
  for (Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    const Vector c = apply_q(e);
    for (Index i = 0; i < n; ++i) q(i, j) = c[i];
    e[j] = 0.0;
  }
  return q;
}

DenseMatrix QrFactorization::r() const {
  const Index n = order();
  DenseMatrix r(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) r(i, j) = qr_(i, j);
  return r;
}

PluFactorization plu_factor(const DenseMatrix& a) { return PluFactorization(a); }
Vector plu_solve(const PluFactorization& f, std::span<const double> b) { return f.solve(b); }
QrFactorization qr_factor(const DenseMatrix& a) { return QrFactorization(a); }
Vector qr_solve(const QrFactorization& f, std::span<const double> b) { return f.solve(b); }

std::unique_ptr<LinearSolver> factor_lu(const Matrix& a) {
  require_dims(rows(a) == cols(a), "factor_lu: matrix must be square");
  if (const auto* b = std::get_if<BandedMatrix>(&a)) return std::make_unique<BandedPluFactorization>(*b);
  if (const auto* s = std::get_if<SparseMatrix>(&a)) {
    const auto [lo, up] = s->bandwidths();
    const Index n = s->rows();
    if (4 * (lo + up + 1) <= n)
      return std::make_unique<BandedPluFactorization>(BandedMatrix::from_dense(s->to_dense(), lo, up));
  }
  return std::make_unique<PluFactorization>(to_dense(a));
}

std::unique_ptr<LinearSolver> factor_qr(const Matrix& a) {
  return std::make_unique<QrFactorization>(to_dense(a));
}

// ----- extreme singular values -------------------------------------------------

LinearOperator as_operator(const Matrix& a) {
  require_dims(rows(a) == cols(a), "as_operator: matrix must be square");
  return {rows(a), [&a](std::span<const double> x) { return matvec(a, x); },
          [&a](std::span<const double> x) { return matvec_transpose(a, x); }};
}

namespace {

void normalize(Vector& x) {
  const double nrm = norm_2(x);
  for (double& v : x) v /= nrm;
}

}  // namespace

namespace {

// Power and inverse iteration converge linearly, so the step between
// successive estimates understates the remaining error when the leading
// ratio is close to 1. The remaining error is bounded by the geometric tail
// step / (1 - rho), with rho estimated from two consecutive steps.
struct GeometricTail {
  double prev = 0.0;
  double prev_step = 0.0;
  int seen = 0;
  bool settled(double est, double rel_tol) {
    const double step = std::abs(est - prev);
    bool ok = false;
    if (seen >= 2) {
      if (step == 0.0) {
        ok = true;
      } else if (step < prev_step) {
        const double rho = step / prev_step;
        ok = step / (1.0 - rho) <= rel_tol * est;
      }
    }
    if (seen >= 1) prev_step = step;
    prev = est;
    ++seen;
    return ok;
  }
};

}  // namespace

SigmaExtremes sigma_extremes(const LinearOperator& m, const LinearSolver& f, const SigmaOptions& opts) {
  require_dims(m.n == f.order(), "sigma_extremes: operator and factorization differ in size");
  SigmaExtremes out;
  Xoshiro256pp rng(0x5167a5eedULL);
  Vector start(m.n);
  for (double& v : start) v = rng.normal();
  normalize(start);

  // sigma_max: ||M x|| for unit x converging to the top right singular vector
  bool conv_max = false;
  Vector x = start;
  GeometricTail tail;
  for (int k = 1; k <= opts.max_iterations; ++k) {
    const Vector mx = m.apply(x);
    const double est = norm_2(mx);
    out.iterations_max = k;
    out.sigma_max = est;
    if (tail.settled(est, opts.rel_tol)) {
      conv_max = true;
      break;
    }
    x = m.apply_transpose(mx);
    if (norm_2(x) == 0.0) {
      conv_max = true;
      break;
    }
    normalize(x);
  }

  if (f.near_singular()) {
    out.near_singular = true;
    out.sigma_min = 0.0;
    out.converged = conv_max;
    return out;
  }

  // sigma_min: 1 / ||M^{-T} x|| for unit x, inverse iteration on M^T M
  bool conv_min = false;
  x = start;
  tail = {};
  for (int k = 1; k <= opts.max_iterations; ++k) {
    const Vector t = f.solve_transpose(x);
    const double est = 1.0 / norm_2(t);
    out.iterations_min = k;
    out.sigma_min = est;
    if (tail.settled(est, opts.rel_tol)) {
      conv_min = true;
      break;
    }
    x = f.solve(t);
    normalize(x);
  }
  out.converged = conv_max && conv_min;
  return out;
}

SigmaExtremes sigma_extremes(const Matrix& a, const LinearSolver& f, const SigmaOptions& opts) {
  return sigma_extremes(as_operator(a), f, opts);
}

}  // namespace rank1
