#pragma once

#include <utility>
#include <vector>

#include "errors.hpp"
#include "sparse.hpp"
#include "split.hpp"

namespace hssgrad {

/// Real equivalent form of a Hermitian system H x = b:
///
///   [ Re(H)  -Im(H) ] [ Re(x) ]   [ Re(b) ]
///   [ Im(H)   Re(H) ] [ Im(x) ] = [ Im(b) ]
///
/// Structural zeros of the real or imaginary blocks are dropped.
inline std::pair<CsrMatrix<double>, Vector<double>> realify(const CsrMatrix<Complex>& h,
                                                             const ComplexVector& b) {
  if (!is_hermitian(h)) throw NotHermitian("realify: operator is not Hermitian");
  detail::require_same_size(h.rows(), b.size(), "realify");
  const std::size_t n = h.rows();

  std::vector<Triplet<double>> entries;
  entries.reserve(4 * h.nnz());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = h.row_ptr()[i]; k < h.row_ptr()[i + 1]; ++k) {
      const std::size_t j = h.col_idx()[k];
      const double re = h.values()[k].real();
      const double im = h.values()[k].imag();
      if (re != 0.0) {
        entries.push_back({i, j, re});
        entries.push_back({n + i, n + j, re});
      }
      if (im != 0.0) {
        entries.push_back({i, n + j, -im});
        entries.push_back({n + i, j, im});
      }
    }
  }

  Vector<double> rb(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    rb[i] = b[i].real();
    rb[n + i] = b[i].imag();
  }
  return {CsrMatrix<double>::from_triplets(2 * n, 2 * n, std::move(entries)), std::move(rb)};
}

}  // namespace hssgrad
