#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "dense.hpp"
#include "estimator.hpp"
#include "inner.hpp"
#include "report.hpp"
#include "split.hpp"

namespace hssgrad {

struct HssConfig {
  double gamma = 1.0;
  double tol = 1e-6;  ///< on ||b - A x_n|| / ||b||
  std::size_t max_outer = 1000;
  InnerConfig hermitian{InnerMethod::cg, 1e-4};
  InnerConfig skew{InnerMethod::cgne, 1e-4};
  /// Start each inner solve from the current outer iterate.
  bool warm_start = true;

  void validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("hss: gamma must be > 0");
    if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("hss: tolerance must lie in (0, 1)");
    if (max_outer < 1) throw std::invalid_argument("hss: outer cap must be >= 1");
    hermitian.validate();
    skew.validate();
    if (hermitian.method == InnerMethod::cgne) {
      throw std::invalid_argument("hss: cgne is not a Hermitian half-step solver");
    }
    if (skew.method != InnerMethod::cgne && skew.method != InnerMethod::direct) {
      throw std::invalid_argument("hss: skew half-step needs cgne or direct");
    }
  }
};

/// Preset used for the solver race: gamma = 1, eps1 = 1e-1, eps2 = 1e-4.
inline HssConfig race_preset(InnerMethod hermitian = InnerMethod::cg) {
  HssConfig cfg;
  cfg.gamma = 1.0;
  cfg.hermitian = {hermitian, 1e-1};
  cfg.skew = {InnerMethod::cgne, 1e-4};
  return cfg;
}

struct OuterReport {
  double gamma = 0.0;
  std::size_t outer_iterations = 0;
  std::vector<double> residual_history;  ///< true residuals, entry 0 for x0
  double final_rel_residual = kNaN;
  std::vector<std::size_t> inner_hermitian;  ///< per outer iteration
  std::vector<std::size_t> inner_skew;
  OpCounts counters;  ///< everything, estimation included
  OpCounts hermitian_counts;
  OpCounts skew_counts;
  OpCounts estimation_counts;
  double seconds = 0.0;
  double seconds_hermitian = 0.0;
  double seconds_skew = 0.0;
  double seconds_estimate = 0.0;
  SolveStatus status = SolveStatus::max_iters;
  std::string diagnostic;
  std::optional<GammaEstimate> estimate;

  bool converged() const { return status == SolveStatus::converged; }
  std::size_t total_inner_hermitian() const { return sum(inner_hermitian); }
  std::size_t total_inner_skew() const { return sum(inner_skew); }
  std::size_t total_inner() const { return total_inner_hermitian() + total_inner_skew(); }

 private:
  static std::size_t sum(const std::vector<std::size_t>& v) {
    std::size_t s = 0;
    for (auto e : v) s += e;
    return s;
  }
};

template <class Scalar>
struct HssResult {
  Vector<Scalar> x;
  OuterReport report;
};

/// ||b - A x|| / ||b||, computed from the stored matrix. Uncounted.
template <class Scalar>
double true_relative_residual(const CsrMatrix<Scalar>& a, const Vector<Scalar>& b,
                              const Vector<Scalar>& x) {
  Vector<Scalar> r(b.size());
  a.multiply(x.span(), r.span());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  const double bn = norm_uncounted(b);
  return norm_uncounted(r) / (bn > 0.0 ? bn : 1.0);
}

namespace detail {

template <class Scalar>
class DenseShiftedSolver {
 public:
  DenseShiftedSolver(const CsrMatrix<Scalar>& m, double gamma) {
    if (m.rows() > kDirectSolveLimit) throw DimensionError("hss: direct inner solve too large");
    DenseMatrix<Scalar> d = to_dense(m);
    d.diagonal().array() += Scalar(gamma);
    lu_.compute(d);
    if (detail::lu_singular(lu_)) {
      throw SingularMatrix("hss: shifted factor singular to working precision");
    }
  }

  InnerResult<Scalar> solve(const Vector<Scalar>& rhs) const {
    using Col = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    Stopwatch clock;
    const Col b = Eigen::Map<const Col>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
    const Col x = lu_.solve(b);
    InnerResult<Scalar> out{Vector<Scalar>(std::vector<Scalar>(x.data(), x.data() + x.size())), {}};
    out.report.method = "direct";
    out.report.iterations = 1;
    out.report.final_rel_residual = 0.0;
    out.report.status = SolveStatus::converged;
    out.report.seconds = clock.seconds();
    return out;
  }

 private:
  Eigen::PartialPivLU<DenseMatrix<Scalar>> lu_;
};

inline InnerConfig warm(InnerConfig cfg, bool on) {
  cfg.warm_start = on;
  return cfg;
}

}  // namespace detail

/// HSS iteration: alternates
///   (gamma I + H) x_{n+1/2} = (gamma I - S) x_n + b,
///   (gamma I + S) x_{n+1}   = (gamma I - H) x_{n+1/2} + b,
/// until the true relative residual drops below cfg.tol. An inner breakdown
/// ends the run with status breakdown and a diagnostic naming the half-step.
template <class Scalar>
HssResult<Scalar> hss_solve(const SplitOperator<Scalar>& sp, const Vector<Scalar>& b,
                            const HssConfig& cfg, std::optional<std::type_identity_t<Vector<Scalar>>> x0 = std::nullopt) {
  cfg.validate();
  const std::size_t n = sp.dim();
  detail::require_same_size(b.size(), n, "hss_solve rhs");
  if (x0) detail::require_same_size(x0->size(), n, "hss_solve x0");

  Stopwatch clock;
  CountingScope total;
  HssResult<Scalar> out{x0 ? std::move(*x0) : Vector<Scalar>(n), {}};
  OuterReport& rep = out.report;
  rep.gamma = cfg.gamma;

  const InnerConfig herm_cfg = detail::warm(cfg.hermitian, cfg.warm_start);
  const InnerConfig skew_cfg = detail::warm(cfg.skew, cfg.warm_start);
  std::optional<detail::DenseShiftedSolver<Scalar>> herm_direct, skew_direct;
  if (herm_cfg.method == InnerMethod::direct) herm_direct.emplace(sp.h, cfg.gamma);
  if (skew_cfg.method == InnerMethod::direct) skew_direct.emplace(sp.s, cfg.gamma);

  const ShiftedOperator<Scalar> herm_plus(sp.h, cfg.gamma, 1.0);
  const ShiftedOperator<Scalar> herm_minus(sp.h, cfg.gamma, -1.0);
  const ShiftedOperator<Scalar> skew_minus(sp.s, cfg.gamma, -1.0);
  const double bnorm = norm(b);
  const double scale = bnorm > 0.0 ? bnorm : 1.0;
  Vector<Scalar> rhs(n), r(n);

  auto residual = [&](const Vector<Scalar>& x) {
    sp.a.apply(x, r);
    xpay(b, Scalar(-1), r);
    return norm(r) / scale;
  };

  double rel = residual(out.x);
  rep.residual_history.push_back(rel);
  for (std::size_t k = 0;; ++k) {
    if (rel <= cfg.tol) {
      rep.status = SolveStatus::converged;
      break;
    }
    if (k >= cfg.max_outer) {
      rep.status = SolveStatus::max_iters;
      break;
    }

    skew_minus.apply(out.x, rhs);
    axpy(Scalar(1), b, rhs);
    InnerResult<Scalar> half;
    {
      Stopwatch t;
      CountingScope phase;
      switch (herm_cfg.method) {
        case InnerMethod::cg: half = cg_solve(herm_plus, rhs, &out.x, herm_cfg); break;
        case InnerMethod::bb: half = bb_solve(herm_plus, rhs, &out.x, herm_cfg); break;
        default: half = herm_direct->solve(rhs); break;
      }
      rep.hermitian_counts += phase.counts();
      rep.seconds_hermitian += t.seconds();
    }
    rep.inner_hermitian.push_back(half.report.iterations);
    if (half.report.status == SolveStatus::breakdown) {
      rep.status = SolveStatus::breakdown;
      rep.diagnostic = "outer iteration " + std::to_string(k) + ": Hermitian half-step " +
                       std::string(to_string(herm_cfg.method)) + " breakdown";
      rep.inner_skew.push_back(0);
      break;
    }

    herm_minus.apply(half.x, rhs);
    axpy(Scalar(1), b, rhs);
    InnerResult<Scalar> full;
    {
      Stopwatch t;
      CountingScope phase;
      if (skew_direct) {
        full = skew_direct->solve(rhs);
      } else {
        full = cgne_solve(cfg.gamma, sp.s, rhs, &half.x, skew_cfg);
      }
      rep.skew_counts += phase.counts();
      rep.seconds_skew += t.seconds();
    }
    rep.inner_skew.push_back(full.report.iterations);
    if (full.report.status == SolveStatus::breakdown) {
      rep.status = SolveStatus::breakdown;
      rep.diagnostic = "outer iteration " + std::to_string(k) + ": skew half-step breakdown";
      break;
    }
    out.x = std::move(full.x);
    ++rep.outer_iterations;
    rel = residual(out.x);
    rep.residual_history.push_back(rel);
  }
  rep.final_rel_residual = true_relative_residual(sp.a, b, out.x);
  rep.counters = total.counts();
  rep.seconds = clock.seconds();
  return out;
}

/// Preadaptive HSS: estimate gamma from a short gradient run, then solve.
/// The shift in `cfg` is ignored. EstimationFailed propagates.
template <class Scalar>
HssResult<Scalar> pahss_solve(const SplitOperator<Scalar>& sp, const Vector<Scalar>& b,
                              const EstimatorConfig& est_cfg, HssConfig cfg,
                              std::optional<std::type_identity_t<Vector<Scalar>>> x0 = std::nullopt) {
  Stopwatch clock;
  GammaEstimate est;
  OpCounts est_counts;
  {
    CountingScope scope;
    est = preadapt(sp, b, est_cfg);
    est_counts = scope.counts();
  }
  const double est_seconds = clock.seconds();
  cfg.gamma = est.value;
  HssResult<Scalar> out = hss_solve(sp, b, cfg, std::move(x0));
  out.report.estimation_counts = est_counts;
  out.report.counters += est_counts;
  out.report.seconds_estimate = est_seconds;
  out.report.seconds += est_seconds;
  out.report.estimate = std::move(est);
  return out;
}

/// max over {lambda_1, lambda_N} of |lambda - gamma| / (lambda + gamma): the
/// HSS contraction bound for a Hermitian part with spectrum in [lambda_1, lambda_N].
inline double contraction_bound(double lambda_1, double lambda_n, double gamma) {
  if (!(lambda_1 > 0.0) || !(lambda_n >= lambda_1) || !(gamma > 0.0)) {
    throw std::invalid_argument("contraction_bound: need 0 < lambda_1 <= lambda_N and gamma > 0");
  }
  return std::max(std::abs(lambda_1 - gamma) / (lambda_1 + gamma),
                  std::abs(lambda_n - gamma) / (lambda_n + gamma));
}

/// Same bound maximized over an explicit eigenvalue list.
inline double contraction_bound(std::span<const double> eigenvalues, double gamma) {
  if (eigenvalues.empty()) throw std::invalid_argument("contraction_bound: empty spectrum");
  if (!(gamma > 0.0)) throw std::invalid_argument("contraction_bound: gamma must be > 0");
  double m = 0.0;
  for (double l : eigenvalues) {
    if (!(l > 0.0)) throw std::invalid_argument("contraction_bound: eigenvalues must be > 0");
    m = std::max(m, std::abs(l - gamma) / (l + gamma));
  }
  return m;
}

inline constexpr std::size_t kIterationMatrixLimit = 512;

struct IterationMatrix {
  DenseMatrix<Complex> t;
  double spectral_radius = kNaN;
};

/// T = (gamma I + S)^-1 (gamma I - H) (gamma I + H)^-1 (gamma I - S), dense.
template <class Scalar>
IterationMatrix iteration_matrix_dense(const SplitOperator<Scalar>& sp, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("iteration_matrix_dense: gamma must be > 0");
  if (sp.dim() > kIterationMatrixLimit) {
    throw DimensionError("iteration_matrix_dense: dimension exceeds limit");
  }
  using M = DenseMatrix<Complex>;
  const M h = to_dense(sp.h).template cast<Complex>();
  const M s = to_dense(sp.s).template cast<Complex>();
  const M id = M::Identity(h.rows(), h.cols());
  const Complex g(gamma, 0.0);
  Eigen::PartialPivLU<M> m1(g * id + h), m2(g * id + s);
  if (detail::lu_singular(m1) || detail::lu_singular(m2)) {
    throw SingularMatrix("iteration_matrix_dense: shifted factor singular");
  }
  IterationMatrix out;
  out.t = m2.solve((g * id - h) * m1.solve(g * id - s));
  out.spectral_radius = spectral_radius(out.t);
  return out;
}

}  // namespace hssgrad
