#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <span>
#include <variant>
#include <vector>

#include "rank1/compensated.hpp"
#include "rank1/core.hpp"

namespace rank1 {

/// Row-major dense matrix of binary64 values.
class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(Index rows, Index cols, double fill = 0.0);
  DenseMatrix(Index rows, Index cols, std::vector<double> row_major);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(Index n);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(Index i, Index j) noexcept { return data_[i * cols_ + j]; }
  double operator()(Index i, Index j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(Index i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(Index i) const noexcept { return {data_.data() + i * cols_, cols_}; }

  const std::vector<double>& data() const noexcept { return data_; }

  template <class F>
  void for_each_in_row(Index i, F&& f) const {
    const double* r = data_.data() + i * cols_;
    for (Index j = 0; j < cols_; ++j) f(j, r[j]);
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> data_;
};

/// Square band matrix. Diagonal d = j - i (from -lower to +upper) is stored
/// contiguously: bands[(d + lower) * order + i]. Slots that fall outside the
/// matrix are kept at zero.
class BandedMatrix {
public:
  BandedMatrix() = default;
  BandedMatrix(Index order, Index lower, Index upper);

  /// Copies the band of `dense`; entries outside the band must be zero.
  static BandedMatrix from_dense(const DenseMatrix& dense, Index lower, Index upper);

  Index order() const noexcept { return n_; }
  Index rows() const noexcept { return n_; }
  Index cols() const noexcept { return n_; }
  Index lower() const noexcept { return lower_; }
  Index upper() const noexcept { return upper_; }

  bool in_band(Index i, Index j) const noexcept {
    return j + lower_ >= i && i + upper_ >= j;
  }
  double operator()(Index i, Index j) const noexcept {
    return in_band(i, j) ? bands_[slot(i, j)] : 0.0;
  }
  /// Mutable access; (i, j) must lie in the band.
  double& at(Index i, Index j) noexcept { return bands_[slot(i, j)]; }

  Index first_col(Index i) const noexcept { return i > lower_ ? i - lower_ : 0; }
  Index last_col(Index i) const noexcept { return std::min(n_ - 1, i + upper_); }

  const std::vector<double>& bands() const noexcept { return bands_; }

  DenseMatrix to_dense() const;

  template <class F>
  void for_each_in_row(Index i, F&& f) const {
    const Index hi = last_col(i);
    for (Index j = first_col(i); j <= hi; ++j) f(j, bands_[slot(i, j)]);
  }

  friend bool operator==(const BandedMatrix&, const BandedMatrix&) = default;

private:
  Index slot(Index i, Index j) const noexcept { return (j + lower_ - i) * n_ + i; }

  Index n_ = 0;
  Index lower_ = 0;
  Index upper_ = 0;
  std::vector<double> bands_;
};

struct Triplet {
  Index row;
  Index col;
  double value;
  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Coordinate storage, sorted row-major with duplicates summed. A CSR view is
/// built at construction for products.
class SparseMatrix {
public:
  SparseMatrix() = default;
  SparseMatrix(Index rows, Index cols, std::vector<Triplet> triplets);

  static SparseMatrix from_dense(const DenseMatrix& dense);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index nnz() const noexcept { return triplets_.size(); }
  double density() const noexcept {
    return rows_ && cols_ ? double(nnz()) / (double(rows_) * double(cols_)) : 0.0;
  }
  const std::vector<Triplet>& triplets() const noexcept { return triplets_; }

  /// Largest |i - j| below and above the diagonal over stored entries.
  std::pair<Index, Index> bandwidths() const noexcept;

  DenseMatrix to_dense() const;

  template <class F>
  void for_each_in_row(Index i, F&& f) const {
    for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) f(triplets_[k].col, triplets_[k].value);
  }

  friend bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.triplets_ == b.triplets_;
  }

private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Triplet> triplets_;
  std::vector<Index> row_ptr_;
};

using Matrix = std::variant<DenseMatrix, BandedMatrix, SparseMatrix>;

Index rows(const Matrix& m);
Index cols(const Matrix& m);
DenseMatrix to_dense(const Matrix& m);
DenseMatrix transpose(const DenseMatrix& m);

struct Norms {
  double one = 0.0;
  double inf = 0.0;
  double frobenius = 0.0;
};

/// Visits the stored entries of row i in increasing column order.
template <class F>
void for_each_in_row(const Matrix& m, Index i, F&& f) {
  std::visit([&](const auto& a) { a.for_each_in_row(i, f); }, m);
}

/// y = M x, each row summed sequentially in increasing column order.
Vector matvec(const Matrix& m, std::span<const double> x);
/// y = |M| |x|.
Vector abs_matvec(const Matrix& m, std::span<const double> x);
/// y = M^T x.
Vector matvec_transpose(const Matrix& m, std::span<const double> x);
/// M x with double-double accumulation per row, rounded once.
Vector matvec_compensated(const Matrix& m, std::span<const double> x);

Norms norms(const Matrix& m);
double norm_inf(const Matrix& m);

// ----- vector helpers -----------------------------------------------------

/// Sequential dot product in index order.
inline double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (Index i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double norm_inf(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

inline double norm_1(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

/// Euclidean norm with scaling, safe for very large or small entries.
double norm_2(std::span<const double> x);

inline Vector abs(std::span<const double> x) {
  Vector r(x.size());
  for (Index i = 0; i < x.size(); ++i) r[i] = std::abs(x[i]);
  return r;
}

}  // namespace rank1
