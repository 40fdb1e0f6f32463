#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "hssgrad/dense.hpp"
#include "hssgrad/sparse.hpp"

namespace hssgrad::fixtures {

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

inline ComplexVector random_complex(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ComplexVector v(n);
  for (auto& e : v) e = {u(rng), u(rng)};
  return v;
}

/// Dense Hermitian positive definite B^H B + shift I with a random complex B.
inline CsrMatrix<Complex> random_hpd(std::size_t n, std::uint64_t seed, double shift = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseMatrix<Complex> b(n, n);
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) b(i, j) = {u(rng), u(rng)};
  DenseMatrix<Complex> h = b.adjoint() * b;
  h = (h + h.adjoint()).eval() * 0.5;
  h.diagonal().array() += shift;
  std::vector<Triplet<Complex>> t;
  for (Eigen::Index i = 0; i < h.rows(); ++i)
    for (Eigen::Index j = 0; j < h.cols(); ++j)
      t.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), h(i, j)});
  return CsrMatrix<Complex>::from_triplets(n, n, std::move(t));
}

/// Random dense skew-Hermitian matrix with entries of modulus up to `scale`.
inline CsrMatrix<Complex> random_skew(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<Triplet<Complex>> t;
  for (std::size_t i = 0; i < n; ++i) {
    t.push_back({i, i, Complex(0.0, u(rng))});
    for (std::size_t j = i + 1; j < n; ++j) {
      const Complex z(u(rng), u(rng));
      t.push_back({i, j, z});
      t.push_back({j, i, -std::conj(z)});
    }
  }
  return CsrMatrix<Complex>::from_triplets(n, n, std::move(t));
}

template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> to_eigen(const Vector<Scalar>& v) {
  return Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(v.data(),
                                                                    static_cast<Eigen::Index>(v.size()));
}

}  // namespace hssgrad::fixtures
