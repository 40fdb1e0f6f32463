#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparse.hpp"
#include "vector.hpp"

namespace hssgrad {

// ---------------------------------------------------------------------------
// 3D convection-diffusion
// ---------------------------------------------------------------------------

enum class Cd3dScaling { h2, none };

/// -Lap(u) + theta (u_x + u_y + u_z) = q on the unit cube, homogeneous
/// Dirichlet data, centered differences on an m x m x m interior grid.
struct Cd3dSpec {
  std::size_t m = 9;
  double theta = 1.0;
  Cd3dScaling scaling = Cd3dScaling::h2;

  std::size_t n() const { return m * m * m; }
  double h() const { return 1.0 / static_cast<double>(m + 1); }

  void validate() const {
    if (m < 1) throw std::invalid_argument("cd3d: m must be >= 1");
    if (!(theta > 0.0)) throw std::invalid_argument("cd3d: theta must be positive");
  }
};

/// Extreme eigenvalues of a Hermitian operator known in closed form.
struct SpectrumBounds {
  double lambda_min;
  double lambda_max;

  double condition() const { return lambda_max / lambda_min; }
  double gamma_star() const { return std::sqrt(lambda_min * lambda_max); }
};

/// 7-point stencil in lexicographic order (x fastest). With h^2 scaling the
/// diagonal is 6 and the axis neighbours are -1 -+ theta h / 2
/// (upstream / downstream); unscaled entries carry an extra 1/h^2.
inline CsrMatrix<Complex> cd3d(const Cd3dSpec& spec) {
  spec.validate();
  const std::size_t m = spec.m;
  const std::size_t n = spec.n();
  const double h = spec.h();
  const double scale = spec.scaling == Cd3dScaling::h2 ? 1.0 : 1.0 / (h * h);
  const double c = spec.theta * h / 2.0;
  const Complex diag{6.0 * scale, 0.0};
  const Complex fwd{(-1.0 + c) * scale, 0.0};
  const Complex bwd{(-1.0 - c) * scale, 0.0};

  std::vector<std::size_t> row_ptr(n + 1, 0);
  std::vector<std::size_t> cols;
  std::vector<Complex> vals;
  cols.reserve(7 * n);
  vals.reserve(7 * n);
  const std::size_t stride[3] = {1, m, m * m};
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t row = i + m * (j + m * k);
        const std::size_t coord[3] = {i, j, k};
        // Ascending column order: -z, -y, -x, centre, +x, +y, +z.
        for (int d = 2; d >= 0; --d) {
          if (coord[d] > 0) {
            cols.push_back(row - stride[d]);
            vals.push_back(bwd);
          }
        }
        cols.push_back(row);
        vals.push_back(diag);
        for (int d = 0; d < 3; ++d) {
          if (coord[d] + 1 < m) {
            cols.push_back(row + stride[d]);
            vals.push_back(fwd);
          }
        }
        row_ptr[row + 1] = cols.size();
      }
    }
  }
  return CsrMatrix<Complex>(n, n, std::move(row_ptr), std::move(cols), std::move(vals));
}

/// lambda_{ijk} = 6 - 2 (cos i pi h + cos j pi h + cos k pi h) (h^2 scaling).
inline SpectrumBounds cd3d_hermitian_bounds(const Cd3dSpec& spec) {
  spec.validate();
  const double h = spec.h();
  const double scale = spec.scaling == Cd3dScaling::h2 ? 1.0 : 1.0 / (h * h);
  const double c = std::cos(std::numbers::pi * h);
  return {(6.0 - 6.0 * c) * scale, (6.0 + 6.0 * c) * scale};
}

// ---------------------------------------------------------------------------
// Prescribed spectra
// ---------------------------------------------------------------------------

struct SpectrumSpec {
  enum class Kind { list, logspace };

  Kind kind = Kind::list;
  std::vector<double> values;  ///< list kind, ascending
  double lo = 1.0;             ///< logspace kind
  double hi = 1.0;
  std::size_t n = 0;
  /// When set, the diagonal order is permuted with this seed.
  std::optional<std::uint64_t> shuffle_seed;

  static SpectrumSpec list(std::vector<double> v) {
    SpectrumSpec s;
    s.values = std::move(v);
    return s;
  }
  static SpectrumSpec logspace(double lo, double hi, std::size_t n) {
    SpectrumSpec s;
    s.kind = Kind::logspace;
    s.lo = lo;
    s.hi = hi;
    s.n = n;
    return s;
  }

  /// Ascending eigenvalues, validated.
  std::vector<double> eigenvalues() const {
    std::vector<double> v;
    if (kind == Kind::list) {
      v = values;
      if (!std::is_sorted(v.begin(), v.end())) {
        throw std::invalid_argument("spectrum: explicit list must be ascending");
      }
    } else {
      if (n == 0) throw std::invalid_argument("spectrum: logspace needs n >= 1");
      if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("spectrum: need 0 < lo <= hi");
      v.resize(n);
      const double ratio = std::log(hi / lo);
      for (std::size_t k = 0; k < n; ++k) {
        v[k] = n == 1 ? lo : lo * std::exp(ratio * static_cast<double>(k) / static_cast<double>(n - 1));
      }
      v.front() = lo;
      if (n > 1) v.back() = hi;
    }
    for (double x : v) {
      if (!(x > 0.0) || !std::isfinite(x)) {
        throw std::invalid_argument("spectrum: values must be positive and finite");
      }
    }
    return v;
  }

  SpectrumBounds bounds() const {
    const auto v = eigenvalues();
    if (v.empty()) throw std::invalid_argument("spectrum: empty");
    return {v.front(), v.back()};
  }
};

/// diag(1, 2, 10, 20, 100, 200, 1000, 2000): condition number 2000.
inline SpectrumSpec diag8_spectrum() {
  return SpectrumSpec::list({1, 2, 10, 20, 100, 200, 1000, 2000});
}

inline CsrMatrix<Complex> diag_matrix(const SpectrumSpec& spec) {
  const auto ev = spec.eigenvalues();
  std::vector<Complex> d(ev.begin(), ev.end());
  if (spec.shuffle_seed) {
    std::mt19937_64 rng(*spec.shuffle_seed);
    std::shuffle(d.begin(), d.end(), rng);
  }
  return CsrMatrix<Complex>::diagonal(d);
}

// ---------------------------------------------------------------------------
// Random Hermitian positive definite
// ---------------------------------------------------------------------------

struct RandomHermitianSpec {
  std::size_t n = 100;
  double density = 0.05;
  std::uint64_t seed = 1;
  /// With a target spectrum the matrix is Q diag(spectrum) Q^H, Q a product
  /// of random complex Givens rotations.
  std::optional<SpectrumSpec> spectrum;
  /// Rotation count; defaults to round(density * n * n / 2).
  std::optional<std::size_t> rotations;
};

namespace detail {

inline CsrMatrix<Complex> dense_to_csr(const std::vector<Complex>& d, std::size_t n) {
  std::vector<std::size_t> row_ptr(n + 1, 0);
  std::vector<std::size_t> cols;
  std::vector<Complex> vals;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Complex v = d[i * n + j];
      if (v != Complex{}) {
        cols.push_back(j);
        vals.push_back(v);
      }
    }
    row_ptr[i + 1] = cols.size();
  }
  return CsrMatrix<Complex>(n, n, std::move(row_ptr), std::move(cols), std::move(vals));
}

}  // namespace detail

inline CsrMatrix<Complex> random_hermitian(const RandomHermitianSpec& spec) {
  if (!(spec.density > 0.0 && spec.density <= 1.0)) {
    throw std::invalid_argument("random_hermitian: density must be in (0, 1]");
  }
  const std::size_t n = spec.n;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  if (spec.spectrum) {
    const auto ev = spec.spectrum->eigenvalues();
    if (ev.size() != n) throw DimensionError("random_hermitian: spectrum length differs from n");
    std::vector<Complex> m(n * n, Complex{});
    for (std::size_t i = 0; i < n; ++i) m[i * n + i] = ev[i];
    if (n < 2) return detail::dense_to_csr(m, n);

    const std::size_t rotations =
        spec.rotations.value_or(static_cast<std::size_t>(
            std::llround(spec.density * static_cast<double>(n) * static_cast<double>(n) / 2.0)));
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    for (std::size_t r = 0; r < rotations; ++r) {
      const std::size_t i = pick(rng);
      std::size_t j = pick(rng);
      while (j == i) j = pick(rng);
      const double th = angle(rng);
      const double ph = angle(rng);
      const double c = std::cos(th);
      const Complex s = std::sin(th) * std::polar(1.0, ph);
      // M <- G M with G = [c, -conj(s); s, c] on coordinates (i, j).
      for (std::size_t k = 0; k < n; ++k) {
        const Complex a = m[i * n + k];
        const Complex b = m[j * n + k];
        m[i * n + k] = c * a - std::conj(s) * b;
        m[j * n + k] = s * a + c * b;
      }
      // M <- M G^H.
      for (std::size_t k = 0; k < n; ++k) {
        const Complex a = m[k * n + i];
        const Complex b = m[k * n + j];
        m[k * n + i] = c * a - s * b;
        m[k * n + j] = std::conj(s) * a + c * b;
      }
    }
    // Remove rounding asymmetry: exact Hermitian storage, real diagonal.
    for (std::size_t i = 0; i < n; ++i) {
      m[i * n + i] = m[i * n + i].real();
      for (std::size_t j = i + 1; j < n; ++j) {
        const Complex avg = 0.5 * (m[i * n + j] + std::conj(m[j * n + i]));
        m[i * n + j] = avg;
        m[j * n + i] = std::conj(avg);
      }
    }
    return detail::dense_to_csr(m, n);
  }

  // Symmetrized random sparse pattern; diagonal dominance makes it HPD.
  std::bernoulli_distribution keep(spec.density);
  std::vector<Triplet<Complex>> entries;
  std::vector<double> rowsum(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!keep(rng)) continue;
      const Complex v{unit(rng), unit(rng)};
      entries.push_back({i, j, v});
      entries.push_back({j, i, std::conj(v)});
      rowsum[i] += std::abs(v);
      rowsum[j] += std::abs(v);
    }
  }
  for (std::size_t i = 0; i < n; ++i) entries.push_back({i, i, Complex{rowsum[i] + 1.0, 0.0}});
  return CsrMatrix<Complex>::from_triplets(n, n, std::move(entries));
}

// ---------------------------------------------------------------------------
// Right-hand sides
// ---------------------------------------------------------------------------

struct RhsSpec {
  enum class Kind { ones, complex_uniform };
  Kind kind = Kind::ones;
  double lo = -10.0;
  double hi = 10.0;
  std::uint64_t seed = 1;
};

/// ones: all entries 1. complex_uniform: real and imaginary parts drawn
/// independently from U[lo, hi].
inline ComplexVector make_rhs(const RhsSpec& spec, std::size_t n) {
  if (spec.kind == RhsSpec::Kind::ones) return ComplexVector(n, Complex{1.0, 0.0});
  if (!(spec.hi >= spec.lo)) throw std::invalid_argument("make_rhs: need lo <= hi");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> dist(spec.lo, spec.hi);
  ComplexVector b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double re = dist(rng);
    const double im = dist(rng);
    b[i] = {re, im};
  }
  return b;
}

/// b = A x* for a known solution.
template <class Scalar>
Vector<Scalar> make_rhs_from_solution(const CsrMatrix<Scalar>& a, const Vector<Scalar>& x_star) {
  detail::require_same_size(a.cols(), x_star.size(), "make_rhs_from_solution");
  Vector<Scalar> b(a.rows());
  a.multiply(x_star.span(), b.span());
  return b;
}

}  // namespace hssgrad
