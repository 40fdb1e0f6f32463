#pragma once

// Dense reference computations backed by Eigen. These are ground-truth
// oracles for small systems; no iterative path depends on them.

#include <Eigen/Dense>
#include <algorithm>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "sparse.hpp"

namespace hssgrad {

template <class Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

namespace detail {

/// Zero pivot, or reciprocal condition estimate at or below machine epsilon.
template <class Lu>
bool lu_singular(const Lu& lu) {
  using Real = typename Eigen::NumTraits<typename Lu::Scalar>::Real;
  const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
  if (pivots.size() == 0) return false;
  if (!(pivots.minCoeff() > Real(0))) return true;
  return !(lu.rcond() > std::numeric_limits<Real>::epsilon());
}

}  // namespace detail

inline constexpr std::size_t kDirectSolveLimit = 4096;

template <class Scalar>
DenseMatrix<Scalar> to_dense(const CsrMatrix<Scalar>& m) {
  DenseMatrix<Scalar> d = DenseMatrix<Scalar>::Zero(static_cast<Eigen::Index>(m.rows()),
                                                    static_cast<Eigen::Index>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t k = m.row_ptr()[i]; k < m.row_ptr()[i + 1]; ++k) {
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m.col_idx()[k])) += m.values()[k];
    }
  }
  return d;
}

/// LU solve with partial pivoting; throws SingularMatrix when the
/// reciprocal condition estimate is below machine epsilon.
template <class Scalar>
Vector<Scalar> direct_solve(const DenseMatrix<Scalar>& op, const Vector<Scalar>& rhs) {
  if (op.rows() != op.cols()) throw DimensionError("direct_solve: matrix not square");
  detail::require_same_size(static_cast<std::size_t>(op.rows()), rhs.size(), "direct_solve");
  if (rhs.size() > kDirectSolveLimit) {
    throw DimensionError("direct_solve: dimension " + std::to_string(rhs.size()) +
                         " exceeds dense limit");
  }
  if (rhs.empty()) return {};
  Eigen::PartialPivLU<DenseMatrix<Scalar>> lu(op);
  if (detail::lu_singular(lu)) {
    throw SingularMatrix("direct_solve: matrix singular to working precision");
  }
  using Col = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Col b = Eigen::Map<const Col>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  const Col x = lu.solve(b);
  return Vector<Scalar>(std::vector<Scalar>(x.data(), x.data() + x.size()));
}

template <class Scalar>
Vector<Scalar> direct_solve(const CsrMatrix<Scalar>& op, const Vector<Scalar>& rhs) {
  if (op.rows() > kDirectSolveLimit) {
    throw DimensionError("direct_solve: dimension exceeds dense limit");
  }
  return direct_solve(to_dense(op), rhs);
}

/// Ascending eigenvalues of a Hermitian matrix.
template <class Scalar>
std::vector<real_t<Scalar>> hermitian_eigenvalues(const CsrMatrix<Scalar>& h) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix<Scalar>> es(to_dense(h), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("hermitian_eigenvalues: no convergence");
  const auto& ev = es.eigenvalues();
  return std::vector<real_t<Scalar>>(ev.data(), ev.data() + ev.size());
}

/// Largest eigenvalue modulus of a general square matrix.
inline double spectral_radius(const DenseMatrix<Complex>& t) {
  Eigen::ComplexEigenSolver<DenseMatrix<Complex>> es(t, false);
  if (es.info() != Eigen::Success) throw std::runtime_error("spectral_radius: no convergence");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace hssgrad
