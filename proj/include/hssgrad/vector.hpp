#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <type_traits>
#include <vector>

#include "counters.hpp"
#include "errors.hpp"

namespace hssgrad {

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};

template <class Scalar>
struct scalar_traits {
  using real_type = Scalar;
};
template <class T>
struct scalar_traits<std::complex<T>> {
  using real_type = T;
};

template <class Scalar>
using real_t = typename scalar_traits<Scalar>::real_type;

/// Field scalars the library is instantiated for: real or complex floating point.
template <class Scalar>
concept FieldScalar =
    std::is_floating_point_v<Scalar> ||
    (is_complex<Scalar>::value && std::is_floating_point_v<real_t<Scalar>>);

using Complex = std::complex<double>;

namespace detail {

template <class Scalar>
constexpr Scalar conj(const Scalar& v) {
  if constexpr (is_complex<Scalar>::value) {
    return std::conj(v);
  } else {
    return v;
  }
}

template <class Scalar>
constexpr real_t<Scalar> real_part(const Scalar& v) {
  if constexpr (is_complex<Scalar>::value) {
    return v.real();
  } else {
    return v;
  }
}

template <class Scalar>
constexpr real_t<Scalar> abs2(const Scalar& v) {
  if constexpr (is_complex<Scalar>::value) {
    return v.real() * v.real() + v.imag() * v.imag();
  } else {
    return v * v;
  }
}

}  // namespace detail

/// Dense vector with a length fixed at construction.
template <FieldScalar Scalar>
class Vector {
 public:
  using value_type = Scalar;
  using real_type = real_t<Scalar>;

  Vector() = default;
  explicit Vector(std::size_t n, Scalar fill = Scalar{}) : data_(n, fill) {}
  Vector(std::initializer_list<Scalar> init) : data_(init) {}
  explicit Vector(std::vector<Scalar> values) : data_(std::move(values)) {}

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  Scalar& operator[](std::size_t i) { return data_[i]; }
  const Scalar& operator[](std::size_t i) const { return data_[i]; }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }
  std::span<Scalar> span() { return data_; }
  std::span<const Scalar> span() const { return data_; }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  const std::vector<Scalar>& values() const { return data_; }

  bool is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](const Scalar& v) { return v == Scalar{}; });
  }

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<Scalar> data_;
};

using ComplexVector = Vector<Complex>;
using RealVector = Vector<double>;

/// Inner product, conjugate-linear in the first slot. Counted as one dot.
template <class Scalar>
Scalar dot(const Vector<Scalar>& u, const Vector<Scalar>& v) {
  detail::require_same_size(u.size(), v.size(), "dot");
  CountingScope::record_dot();
  Scalar sum{};
  for (std::size_t i = 0; i < u.size(); ++i) sum += detail::conj(u[i]) * v[i];
  return sum;
}

/// Euclidean norm. Counted as one dot.
template <class Scalar>
real_t<Scalar> norm(const Vector<Scalar>& v) {
  CountingScope::record_dot();
  real_t<Scalar> sum{};
  for (const auto& e : v) sum += detail::abs2(e);
  return std::sqrt(sum);
}

/// y <- alpha * x + y. Counted as one vector update.
template <class Scalar>
void axpy(Scalar alpha, const Vector<Scalar>& x, Vector<Scalar>& y) {
  detail::require_same_size(x.size(), y.size(), "axpy");
  CountingScope::record_update();
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

/// Out-of-place form: returns alpha * u + v.
template <class Scalar>
Vector<Scalar> axpy(Scalar alpha, const Vector<Scalar>& u, const Vector<Scalar>& v) {
  Vector<Scalar> out = v;
  axpy(alpha, u, out);
  return out;
}

/// y <- x + beta * y. Counted as one vector update.
template <class Scalar>
void xpay(const Vector<Scalar>& x, Scalar beta, Vector<Scalar>& y) {
  detail::require_same_size(x.size(), y.size(), "xpay");
  CountingScope::record_update();
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + beta * y[i];
}

// Uncounted helpers for setup and verification code.

template <class Scalar>
real_t<Scalar> max_abs_diff(const Vector<Scalar>& u, const Vector<Scalar>& v) {
  detail::require_same_size(u.size(), v.size(), "max_abs_diff");
  real_t<Scalar> m{};
  for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u[i] - v[i]));
  return m;
}

template <class Scalar>
real_t<Scalar> norm_uncounted(const Vector<Scalar>& v) {
  real_t<Scalar> sum{};
  for (const auto& e : v) sum += detail::abs2(e);
  return std::sqrt(sum);
}

template <class Scalar>
Vector<Scalar> subtract(const Vector<Scalar>& u, const Vector<Scalar>& v) {
  detail::require_same_size(u.size(), v.size(), "subtract");
  Vector<Scalar> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] - v[i];
  return out;
}

template <class Scalar>
Vector<Scalar> scaled(const Vector<Scalar>& v, Scalar s) {
  Vector<Scalar> out = v;
  for (auto& e : out) e *= s;
  return out;
}

}  // namespace hssgrad
