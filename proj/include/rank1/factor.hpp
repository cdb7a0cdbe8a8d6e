#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string_view>

#include "rank1/matrix.hpp"

namespace rank1 {

enum class SolverKind { Lu, BandedLu, Qr };

std::string_view to_string(SolverKind k);

/// A factored square matrix that can solve with itself and its transpose.
/// Implementations are immutable once built, so concurrent solves are fine.
class LinearSolver {
public:
  virtual ~LinearSolver() = default;
  virtual Index order() const = 0;
  virtual SolverKind kind() const = 0;
  virtual Vector solve(std::span<const double> b) const = 0;
  virtual Vector solve_transpose(std::span<const double> b) const = 0;
  /// Smallest pivot fell below n * u * ||A||_inf.
  virtual bool near_singular() const { return false; }
};

/// P A = L U with partial pivoting. L (unit lower) and U are packed in lu();
/// pivots()[i] is the original row that ends up in position i.
class PluFactorization final : public LinearSolver {
public:
  explicit PluFactorization(DenseMatrix a);

  Index order() const override { return lu_.rows(); }
  SolverKind kind() const override { return SolverKind::Lu; }
  Vector solve(std::span<const double> b) const override;
  Vector solve_transpose(std::span<const double> b) const override;
  bool near_singular() const override { return near_singular_; }

  const DenseMatrix& lu() const noexcept { return lu_; }
  const std::vector<Index>& pivots() const noexcept { return pivots_; }
  int sign() const noexcept { return sign_; }
  double min_pivot() const noexcept { return min_pivot_; }

  DenseMatrix lower() const;
  DenseMatrix upper() const;

private:
  DenseMatrix lu_;
  std::vector<Index> pivots_;
  int sign_ = 1;
  double min_pivot_ = 0.0;
  bool near_singular_ = false;
};

/// Band LU with partial pivoting (row interchanges logged per step, as in
/// LAPACK gbtf2). U gains lower + upper superdiagonals from fill.
class BandedPluFactorization final : public LinearSolver {
public:
  explicit BandedPluFactorization(const BandedMatrix& a);

  Index order() const override { return n_; }
  SolverKind kind() const override { return SolverKind::BandedLu; }
  Vector solve(std::span<const double> b) const override;
  Vector solve_transpose(std::span<const double> b) const override;
  bool near_singular() const override { return near_singular_; }

  Index lower() const noexcept { return kl_; }
  /// Upper bandwidth of U after fill.
  Index upper_after_fill() const noexcept { return kl_ + ku_; }
  /// interchanges()[j] is the row swapped with row j at step j.
  const std::vector<Index>& interchanges() const noexcept { return ipiv_; }

  DenseMatrix upper_factor() const;

private:
  double& at(Index i, Index j) noexcept { return ab_[(kv_ + i - j) + j * ldab_]; }
  double at(Index i, Index j) const noexcept { return ab_[(kv_ + i - j) + j * ldab_]; }

  Index n_, kl_, ku_, kv_, ldab_;
  std::vector<double> ab_;
  std::vector<Index> ipiv_;
  bool near_singular_ = false;
};

/// Householder QR. Reflectors are stored below the diagonal with an implicit
/// unit leading entry; R (upper triangle) has a nonnegative diagonal.
class QrFactorization final : public LinearSolver {
public:
  explicit QrFactorization(DenseMatrix a);

  Index order() const override { return qr_.rows(); }
  SolverKind kind() const override { return SolverKind::Qr; }
  Vector solve(std::span<const double> b) const override;
  Vector solve_transpose(std::span<const double> b) const override;

  const DenseMatrix& packed() const noexcept { return qr_; }
  const Vector& tau() const noexcept { return tau_; }

  DenseMatrix q() const;
  DenseMatrix r() const;

  /// Q^T b and Q b.
  Vector apply_qt(std::span<const double> b) const;
  Vector apply_q(std::span<const double> b) const;

private:
  DenseMatrix qr_;
  Vector tau_;
};

PluFactorization plu_factor(const DenseMatrix& a);
Vector plu_solve(const PluFactorization& f, std::span<const double> b);
QrFactorization qr_factor(const DenseMatrix& a);
Vector qr_solve(const QrFactorization& f, std::span<const double> b);

/// LU suited to the storage: band LU for banded matrices and for sparse ones
/// whose bandwidth is narrow, dense PLU otherwise.
std::unique_ptr<LinearSolver> factor_lu(const Matrix& a);
/// Dense Householder QR of A.
std::unique_ptr<LinearSolver> factor_qr(const Matrix& a);

// ----- extreme singular values ---------------------------------------------

/// y = M x and y = M^T x for some square M.
struct LinearOperator {
  Index n = 0;
  std::function<Vector(std::span<const double>)> apply;
  std::function<Vector(std::span<const double>)> apply_transpose;
};

LinearOperator as_operator(const Matrix& a);

struct SigmaOptions {
  double rel_tol = 1e-4;
  int max_iterations = 200;
};

struct SigmaExtremes {
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  bool converged = false;
  bool near_singular = false;
  int iterations_max = 0;
  int iterations_min = 0;

  /// sigma_max / sigma_min (infinite when flagged near singular).
  double condition() const { return sigma_min > 0.0 ? sigma_max / sigma_min : kInf; }
};

/// Power iteration on M^T M for sigma_max and inverse iteration through the
/// factorization for sigma_min. A near-singular factorization reports
/// sigma_min = 0 with the flag set.
SigmaExtremes sigma_extremes(const LinearOperator& m, const LinearSolver& f,
                             const SigmaOptions& opts = {});
SigmaExtremes sigma_extremes(const Matrix& a, const LinearSolver& f, const SigmaOptions& opts = {});

}  // namespace rank1
