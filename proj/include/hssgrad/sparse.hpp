#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "counters.hpp"
#include "errors.hpp"
#include "vector.hpp"

namespace hssgrad {

template <class Scalar>
struct Triplet {
  std::size_t row;
  std::size_t col;
  Scalar value;
};

/// Compressed sparse row matrix. Immutable after construction, so a single
/// instance may be shared by concurrent solver runs.
template <FieldScalar Scalar>
class CsrMatrix {
 public:
  using scalar_type = Scalar;
  using real_type = real_t<Scalar>;

  CsrMatrix() : row_ptr_(1, 0) {}

  CsrMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
            std::vector<std::size_t> col_idx, std::vector<Scalar> values)
      : rows_(rows),
        cols_(cols),
        row_ptr_(std::move(row_ptr)),
        col_idx_(std::move(col_idx)),
        values_(std::move(values)) {
    validate();
  }

  /// Sums duplicates; entries may come in any order.
  static CsrMatrix from_triplets(std::size_t rows, std::size_t cols,
                                 std::vector<Triplet<Scalar>> entries) {
    for (const auto& t : entries) {
      if (t.row >= rows || t.col >= cols) throw DimensionError("triplet index out of range");
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<std::size_t> row_ptr(rows + 1, 0);
    std::vector<std::size_t> col_idx;
    std::vector<Scalar> values;
    col_idx.reserve(entries.size());
    values.reserve(entries.size());
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const auto& t = entries[k];
      if (k > 0 && entries[k - 1].row == t.row && entries[k - 1].col == t.col) {
        values.back() += t.value;
        continue;
      }
      col_idx.push_back(t.col);
      values.push_back(t.value);
      ++row_ptr[t.row + 1];
    }
    for (std::size_t i = 0; i < rows; ++i) row_ptr[i + 1] += row_ptr[i];
    return CsrMatrix(rows, cols, std::move(row_ptr), std::move(col_idx), std::move(values));
  }

  static CsrMatrix identity(std::size_t n) {
    return diagonal(std::vector<Scalar>(n, Scalar{1}));
  }

  static CsrMatrix diagonal(std::span<const Scalar> d) {
    const std::size_t n = d.size();
    std::vector<std::size_t> row_ptr(n + 1);
    std::vector<std::size_t> col_idx(n);
    for (std::size_t i = 0; i <= n; ++i) row_ptr[i] = i;
    for (std::size_t i = 0; i < n; ++i) col_idx[i] = i;
    return CsrMatrix(n, n, std::move(row_ptr), std::move(col_idx),
                     std::vector<Scalar>(d.begin(), d.end()));
  }
  static CsrMatrix diagonal(const std::vector<Scalar>& d) {
    return diagonal(std::span<const Scalar>(d));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t dim() const { return rows_; }
  std::size_t nnz() const { return values_.size(); }
  bool is_square() const { return rows_ == cols_; }

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& col_idx() const { return col_idx_; }
  const std::vector<Scalar>& values() const { return values_; }

  /// Stored entry (i, j) or zero.
  Scalar at(std::size_t i, std::size_t j) const {
    if (i >= rows_ || j >= cols_) throw DimensionError("CsrMatrix::at out of range");
    auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return Scalar{};
    return values_[static_cast<std::size_t>(it - col_idx_.begin())];
  }

  real_type max_abs() const {
    real_type m{};
    for (const auto& v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Conjugate transpose as a new matrix.
  CsrMatrix adjoint() const {
    std::vector<std::size_t> row_ptr(cols_ + 1, 0);
    for (auto c : col_idx_) ++row_ptr[c + 1];
    for (std::size_t i = 0; i < cols_; ++i) row_ptr[i + 1] += row_ptr[i];
    std::vector<std::size_t> fill(row_ptr.begin(), row_ptr.end() - 1);
    std::vector<std::size_t> col_idx(nnz());
    std::vector<Scalar> values(nnz());
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        const std::size_t dst = fill[col_idx_[k]]++;
        col_idx[dst] = i;
        values[dst] = detail::conj(values_[k]);
      }
    }
    return CsrMatrix(cols_, rows_, std::move(row_ptr), std::move(col_idx), std::move(values));
  }

  /// y <- shift * x + coeff * (A x). Raw kernel, not counted.
  void multiply(std::span<const Scalar> x, std::span<Scalar> y, Scalar coeff = Scalar{1},
                Scalar shift = Scalar{}) const {
    for (std::size_t i = 0; i < rows_; ++i) {
      Scalar acc{};
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) acc += values_[k] * x[col_idx_[k]];
      y[i] = coeff * acc + (shift == Scalar{} ? Scalar{} : shift * x[i]);
    }
  }

  /// y <- A x, counted as one matvec.
  void apply(const Vector<Scalar>& x, Vector<Scalar>& y) const {
    detail::require_same_size(x.size(), cols_, "CsrMatrix::apply");
    detail::require_same_size(y.size(), rows_, "CsrMatrix::apply");
    CountingScope::record_matvec();
    multiply(x.span(), y.span());
  }

  /// y <- A^H x, counted as one matvec.
  void adjoint_apply(const Vector<Scalar>& x, Vector<Scalar>& y) const {
    detail::require_same_size(x.size(), rows_, "CsrMatrix::adjoint_apply");
    detail::require_same_size(y.size(), cols_, "CsrMatrix::adjoint_apply");
    CountingScope::record_matvec();
    std::fill(y.begin(), y.end(), Scalar{});
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        y[col_idx_[k]] += detail::conj(values_[k]) * x[i];
      }
    }
  }

 private:
  void validate() const {
    if (row_ptr_.size() != rows_ + 1) throw DimensionError("CsrMatrix: row pointer length");
    if (row_ptr_.front() != 0 || row_ptr_.back() != col_idx_.size() ||
        col_idx_.size() != values_.size()) {
      throw DimensionError("CsrMatrix: inconsistent array lengths");
    }
    for (std::size_t i = 0; i < rows_; ++i) {
      if (row_ptr_[i] > row_ptr_[i + 1]) throw DimensionError("CsrMatrix: row pointer decreases");
      for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        if (col_idx_[k] >= cols_) throw DimensionError("CsrMatrix: column index out of range");
        if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1]) {
          throw DimensionError("CsrMatrix: column indices not strictly increasing in row " +
                               std::to_string(i));
        }
      }
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_idx_;
  std::vector<Scalar> values_;
};

using SparseOperator = CsrMatrix<Complex>;

/// Square operator applied into a preallocated output.
template <class Op>
concept LinearOperator = requires(const Op& op, const Vector<typename Op::scalar_type>& x,
                                  Vector<typename Op::scalar_type>& y) {
  typename Op::scalar_type;
  { op.dim() } -> std::convertible_to<std::size_t>;
  op.apply(x, y);
};

template <class Scalar>
Vector<Scalar> adjoint_apply(const CsrMatrix<Scalar>& op, const Vector<Scalar>& x) {
  Vector<Scalar> y(op.cols());
  op.adjoint_apply(x, y);
  return y;
}

template <LinearOperator Op>
Vector<typename Op::scalar_type> apply(const Op& op, const Vector<typename Op::scalar_type>& x) {
  Vector<typename Op::scalar_type> y(op.dim());
  op.apply(x, y);
  return y;
}

/// shift * I + sign * M, applied as one fused counted matvec; never materialized.
template <FieldScalar Scalar>
class ShiftedOperator {
 public:
  using scalar_type = Scalar;

  ShiftedOperator(const CsrMatrix<Scalar>& m, real_t<Scalar> shift, real_t<Scalar> sign = 1)
      : m_(&m), shift_(shift), sign_(sign) {
    if (!m.is_square()) throw DimensionError("ShiftedOperator: operator not square");
  }

  ShiftedOperator(const CsrMatrix<Scalar>&&, real_t<Scalar>, real_t<Scalar> = 1) = delete;

  std::size_t dim() const { return m_->rows(); }
  real_t<Scalar> shift() const { return shift_; }

  void apply(const Vector<Scalar>& x, Vector<Scalar>& y) const {
    detail::require_same_size(x.size(), dim(), "ShiftedOperator::apply");
    detail::require_same_size(y.size(), dim(), "ShiftedOperator::apply");
    CountingScope::record_matvec();
    m_->multiply(x.span(), y.span(), Scalar(sign_), Scalar(shift_));
  }

 private:
  const CsrMatrix<Scalar>* m_;
  real_t<Scalar> shift_;
  real_t<Scalar> sign_;
};

/// gamma^2 I - S^2 for skew-Hermitian S: the normal-equations operator of
/// gamma I + S. Hermitian positive definite for gamma > 0. Two counted
/// S applications per apply.
template <FieldScalar Scalar>
class SkewNormalOperator {
 public:
  using scalar_type = Scalar;

  SkewNormalOperator(const CsrMatrix<Scalar>& s, real_t<Scalar> gamma)
      : s_(&s), gamma_(gamma), work_(s.rows()) {
    if (!s.is_square()) throw DimensionError("SkewNormalOperator: operator not square");
  }

  SkewNormalOperator(const CsrMatrix<Scalar>&&, real_t<Scalar>) = delete;

  std::size_t dim() const { return s_->rows(); }

  void apply(const Vector<Scalar>& x, Vector<Scalar>& y) const {
    detail::require_same_size(x.size(), dim(), "SkewNormalOperator::apply");
    detail::require_same_size(y.size(), dim(), "SkewNormalOperator::apply");
    CountingScope::record_matvec();
    s_->multiply(x.span(), work_.span());
    CountingScope::record_matvec();
    s_->multiply(work_.span(), y.span(), Scalar(-1));
    const Scalar g2(gamma_ * gamma_);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += g2 * x[i];
  }

 private:
  const CsrMatrix<Scalar>* s_;
  real_t<Scalar> gamma_;
  mutable Vector<Scalar> work_;
};

}  // namespace hssgrad
