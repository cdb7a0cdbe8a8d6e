#include "rank1/matrix.hpp"

#include <algorithm>

namespace rank1 {

DenseMatrix::DenseMatrix(Index rows, Index cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(Index rows, Index cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  require_dims(data_.size() == rows * cols, "DenseMatrix: entry count != rows*cols");
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require_dims(r.size() == cols_, "DenseMatrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

DenseMatrix DenseMatrix::identity(Index n) {
  DenseMatrix m(n, n);
  for (Index i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

BandedMatrix::BandedMatrix(Index order, Index lower, Index upper)
    : n_(order), lower_(lower), upper_(upper), bands_((lower + upper + 1) * order, 0.0) {
  require_dims(order > 0 && lower + upper + 1 <= order,
               "BandedMatrix: lower + upper + 1 must not exceed the order");
}

BandedMatrix BandedMatrix::from_dense(const DenseMatrix& dense, Index lower, Index upper) {
  require_dims(dense.rows() == dense.cols(), "BandedMatrix: matrix must be square");
  BandedMatrix b(dense.rows(), lower, upper);
  for (Index i = 0; i < dense.rows(); ++i)
    for (Index j = 0; j < dense.cols(); ++j) {
      if (b.in_band(i, j))
        b.at(i, j) = dense(i, j);
      else
        require_dims(dense(i, j) == 0.0, "BandedMatrix: nonzero entry outside the band");
    }
  return b;
}

DenseMatrix BandedMatrix::to_dense() const {
  DenseMatrix d(n_, n_);
  for (Index i = 0; i < n_; ++i)
    for_each_in_row(i, [&](Index j, double a) { d(i, j) = a; });
  return d;
}

SparseMatrix::SparseMatrix(Index rows, Index cols, std::vector<Triplet> triplets)
    : rows_(rows), cols_(cols) {
  for (const auto& t : triplets)
    require_dims(t.row < rows && t.col < cols, "SparseMatrix: index out of range");
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  for (const auto& t : triplets) {
    if (!triplets_.empty() && triplets_.back().row == t.row && triplets_.back().col == t.col)
      triplets_.back().value += t.value;
    else
      triplets_.push_back(t);
  }
  row_ptr_.assign(rows_ + 1, 0);
  for (const auto& t : triplets_) ++row_ptr_[t.row + 1];
  for (Index i = 0; i < rows_; ++i) row_ptr_[i + 1] += row_ptr_[i];
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& dense) {
  std::vector<Triplet> t;
  for (Index i = 0; i < dense.rows(); ++i)
    for (Index j = 0; j < dense.cols(); ++j)
      if (dense(i, j) != 0.0) t.push_back({i, j, dense(i, j)});
  return SparseMatrix(dense.rows(), dense.cols(), std::move(t));
}

std::pair<Index, Index> SparseMatrix::bandwidths() const noexcept {
  Index lo = 0, up = 0;
  for (const auto& t : triplets_) {
    if (t.row > t.col) lo = std::max(lo, t.row - t.col);
    if (t.col > t.row) up = std::max(up, t.col - t.row);
  }
  return {lo, up};
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix d(rows_, cols_);
  for (const auto& t : triplets_) d(t.row, t.col) = t.value;
  return d;
}

Index rows(const Matrix& m) {
  return std::visit([](const auto& a) { return a.rows(); }, m);
}

Index cols(const Matrix& m) {
  return std::visit([](const auto& a) { return a.cols(); }, m);
}

DenseMatrix to_dense(const Matrix& m) {
  return std::visit(
      [](const auto& a) -> DenseMatrix {
        if constexpr (std::is_same_v<std::decay_t<decltype(a)>, DenseMatrix>)
          return a;
        else
          return a.to_dense();
      },
      m);
}

DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix t(m.cols(), m.rows());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

namespace {

template <class RowOp>
Vector row_map(const Matrix& m, std::span<const double> x, const char* what, RowOp op) {
  require_dims(cols(m) == x.size(), what);
  const Index n = rows(m);
  Vector y(n);
  std::visit(
      [&](const auto& a) {
        for (Index i = 0; i < n; ++i) y[i] = op(a, i);
      },
      m);
  return y;
}

}  // namespace

Vector matvec(const Matrix& m, std::span<const double> x) {
  return row_map(m, x, "matvec: dimension mismatch", [&](const auto& a, Index i) {
    double s = 0.0;
    a.for_each_in_row(i, [&](Index j, double v) { s += v * x[j]; });
    return s;
  });
}

Vector abs_matvec(const Matrix& m, std::span<const double> x) {
  return row_map(m, x, "abs_matvec: dimension mismatch", [&](const auto& a, Index i) {
    double s = 0.0;
    a.for_each_in_row(i, [&](Index j, double v) { s += std::abs(v) * std::abs(x[j]); });
    return s;
  });
}

Vector matvec_compensated(const Matrix& m, std::span<const double> x) {
  return row_map(m, x, "matvec_compensated: dimension mismatch", [&](const auto& a, Index i) {
    compensated::Accumulator acc;
    a.for_each_in_row(i, [&](Index j, double v) { acc.add_product(v, x[j]); });
    return acc.value();
  });
}

Vector matvec_transpose(const Matrix& m, std::span<const double> x) {
  require_dims(rows(m) == x.size(), "matvec_transpose: dimension mismatch");
  Vector y(cols(m), 0.0);
  const Index n = rows(m);
  std::visit(
      [&](const auto& a) {
        for (Index i = 0; i < n; ++i) a.for_each_in_row(i, [&](Index j, double v) { y[j] += v * x[i]; });
      },
      m);
  return y;
}

Norms norms(const Matrix& m) {
  Norms out;
  const Index n = rows(m);
  Vector colsum(cols(m), 0.0);
  double sumsq = 0.0;
  std::visit(
      [&](const auto& a) {
        for (Index i = 0; i < n; ++i) {
          double rs = 0.0;
          a.for_each_in_row(i, [&](Index j, double v) {
            rs += std::abs(v);
            colsum[j] += std::abs(v);
            sumsq += v * v;
          });
          out.inf = std::max(out.inf, rs);
        }
      },
      m);
  for (double c : colsum) out.one = std::max(out.one, c);
  out.frobenius = std::sqrt(sumsq);
  return out;
}

double norm_inf(const Matrix& m) {
  double best = 0.0;
  const Index n = rows(m);
  for (Index i = 0; i < n; ++i) {
    double rs = 0.0;
    for_each_in_row(m, i, [&](Index, double v) { rs += std::abs(v); });
    best = std::max(best, rs);
  }
  return best;
}

double norm_2(std::span<const double> x) {
  const double scale = norm_inf(x);
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (double v : x) {
    const double t = v / scale;
    s += t * t;
  }
  return scale * std::sqrt(s);
}

}  // namespace rank1
