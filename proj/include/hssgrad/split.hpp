#pragma once

#include <cmath>
#include <vector>

#include "errors.hpp"
#include "sparse.hpp"

namespace hssgrad {

/// A together with its materialized Hermitian part H = (A + A^H)/2 and
/// skew-Hermitian part S = (A - A^H)/2. S^H = -S, so only S is stored.
template <FieldScalar Scalar>
struct SplitOperator {
  CsrMatrix<Scalar> a;
  CsrMatrix<Scalar> h;
  CsrMatrix<Scalar> s;

  std::size_t dim() const { return a.rows(); }
};

/// Hermitian/skew-Hermitian splitting. Both parts share the symmetrized
/// sparsity pattern of a; entries that cancel are kept as explicit zeros.
template <class Scalar>
SplitOperator<Scalar> split(const CsrMatrix<Scalar>& a) {
  if (!a.is_square()) throw DimensionError("split: operator is not square");
  const CsrMatrix<Scalar> ah = a.adjoint();
  const std::size_t n = a.rows();
  const Scalar half{0.5};

  std::vector<std::size_t> row_ptr(n + 1, 0);
  std::vector<std::size_t> cols;
  std::vector<Scalar> hv;
  std::vector<Scalar> sv;
  cols.reserve(2 * a.nnz());
  hv.reserve(2 * a.nnz());
  sv.reserve(2 * a.nnz());

  for (std::size_t i = 0; i < n; ++i) {
    std::size_t p = a.row_ptr()[i];
    std::size_t q = ah.row_ptr()[i];
    const std::size_t pend = a.row_ptr()[i + 1];
    const std::size_t qend = ah.row_ptr()[i + 1];
    while (p < pend || q < qend) {
      std::size_t col;
      Scalar x{};
      Scalar y{};
      if (q >= qend || (p < pend && a.col_idx()[p] < ah.col_idx()[q])) {
        col = a.col_idx()[p];
        x = a.values()[p++];
      } else if (p >= pend || ah.col_idx()[q] < a.col_idx()[p]) {
        col = ah.col_idx()[q];
        y = ah.values()[q++];
      } else {
        col = a.col_idx()[p];
        x = a.values()[p++];
        y = ah.values()[q++];
      }
      cols.push_back(col);
      hv.push_back((x + y) * half);
      sv.push_back((x - y) * half);
    }
    row_ptr[i + 1] = cols.size();
  }
  auto h = CsrMatrix<Scalar>(n, n, row_ptr, cols, std::move(hv));
  auto s = CsrMatrix<Scalar>(n, n, std::move(row_ptr), std::move(cols), std::move(sv));
  return {a, std::move(h), std::move(s)};
}

/// Largest |m_ij - conj(m_ji)| over the stored pattern of both triangles.
template <class Scalar>
real_t<Scalar> hermitian_defect(const CsrMatrix<Scalar>& m) {
  real_t<Scalar> worst{};
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t k = m.row_ptr()[i]; k < m.row_ptr()[i + 1]; ++k) {
      const std::size_t j = m.col_idx()[k];
      worst = std::max(worst, std::abs(m.values()[k] - detail::conj(m.at(j, i))));
    }
  }
  return worst;
}

/// Largest |m_ij + conj(m_ji)|.
template <class Scalar>
real_t<Scalar> skew_hermitian_defect(const CsrMatrix<Scalar>& m) {
  real_t<Scalar> worst{};
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t k = m.row_ptr()[i]; k < m.row_ptr()[i + 1]; ++k) {
      const std::size_t j = m.col_idx()[k];
      worst = std::max(worst, std::abs(m.values()[k] + detail::conj(m.at(j, i))));
    }
  }
  return worst;
}

template <class Scalar>
bool is_hermitian(const CsrMatrix<Scalar>& m, real_t<Scalar> rel_tol = 1e-14) {
  return m.is_square() && hermitian_defect(m) <= rel_tol * m.max_abs();
}

}  // namespace hssgrad
