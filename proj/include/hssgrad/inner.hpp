#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>

#include "graditer.hpp"
#include "report.hpp"
#include "sparse.hpp"

namespace hssgrad {

enum class InnerMethod { cg, bb, cgne, direct };

/// Denominator of the inner stopping test. With a zero initial guess both
/// choices coincide; with a warm start only `initial` keeps tightening as the
/// outer iteration converges.
enum class ResidualReference { initial, rhs };

constexpr std::string_view to_string(InnerMethod m) {
  switch (m) {
    case InnerMethod::cg: return "cg";
    case InnerMethod::bb: return "bb";
    case InnerMethod::cgne: return "cgne";
    case InnerMethod::direct: return "direct";
  }
  return "?";
}

struct InnerConfig {
  InnerMethod method = InnerMethod::cg;
  double tol = 1e-4;  ///< on ||rhs - op x_k|| / ||reference||
  ResidualReference reference = ResidualReference::initial;
  std::size_t max_iters = 0;  ///< 0: 10 N for CG/CGNE, 50 N for BB
  bool warm_start = false;
  std::size_t min_iters = 0;
  std::size_t refresh_every = 50;  ///< true-residual recomputation period

  void validate() const {
    if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("inner: tolerance must lie in (0, 1)");
  }

  std::size_t cap(std::size_t n) const {
    if (max_iters > 0) return max_iters;
    const std::size_t factor = method == InnerMethod::bb ? 50 : 10;
    return std::max<std::size_t>(1, factor * n);
  }
};

template <class Scalar>
struct InnerResult {
  Vector<Scalar> x;
  SolveReport report;
};

namespace detail {

/// Conjugate gradient loop on HPD `op`. `monitor(x, rr)` returns the residual
/// norm used for stopping, divided by `rhs_norm` or by its initial value as
/// cfg.reference says. Counted work inside the monitor must be charged to the
/// ledger's overhead by the caller.
template <LinearOperator Op, class Monitor>
void cg_loop(const Op& op, const Vector<typename Op::scalar_type>& rhs,
             Vector<typename Op::scalar_type>& x, const InnerConfig& cfg, CostLedger& ledger,
             double rhs_norm, SolveReport& report, Monitor&& monitor) {
  using Scalar = typename Op::scalar_type;
  const std::size_t n = op.dim();
  Vector<Scalar> r(n), p(n), q(n);
  double rr = ledger.overhead([&] {
    op.apply(x, r);
    xpay(rhs, Scalar(-1), r);
    return detail::real_part(dot(r, r));
  });
  p = r;
  const std::size_t cap = cfg.cap(n);

  const double r0 = monitor(x, rr);
  const double ref = cfg.reference == ResidualReference::rhs ? rhs_norm : r0;
  const double scale = ref > 0.0 ? ref : 1.0;
  double rel = r0 / scale;
  report.residual_history.push_back(rel);
  for (std::size_t k = 0;; ++k) {
    if ((k >= cfg.min_iters && rel <= cfg.tol) || rr == 0.0) {
      report.status = SolveStatus::converged;
      break;
    }
    if (k >= cap) {
      report.status = SolveStatus::max_iters;
      break;
    }
    op.apply(p, q);
    const double pq = detail::real_part(dot(p, q));
    if (!(pq > 0.0)) {
      report.status = SolveStatus::breakdown;
      break;
    }
    const Scalar a = Scalar(rr / pq);
    axpy(a, p, x);
    axpy(-a, q, r);
    const double rr_next = detail::real_part(dot(r, r));
    xpay(r, Scalar(rr_next / rr), p);
    rr = rr_next;
    ++report.iterations;
    if (cfg.refresh_every > 0 && report.iterations % cfg.refresh_every == 0) {
      rr = ledger.overhead([&] {
        op.apply(x, r);
        xpay(rhs, Scalar(-1), r);
        return detail::real_part(dot(r, r));
      });
    }
    rel = monitor(x, rr) / scale;
    report.residual_history.push_back(rel);
  }
  report.final_rel_residual = rel;
}

template <class Scalar>
Vector<Scalar> initial_guess(const InnerConfig& cfg, std::size_t n, const Vector<Scalar>* x0) {
  if (cfg.warm_start && x0 != nullptr) {
    detail::require_same_size(x0->size(), n, "inner solve x0");
    return *x0;
  }
  return Vector<Scalar>(n);
}

}  // namespace detail

/// Conjugate gradients for an HPD operator such as gamma I + H.
/// x0 is used only when cfg.warm_start is set.
template <LinearOperator Op>
InnerResult<typename Op::scalar_type> cg_solve(const Op& op,
                                               const Vector<typename Op::scalar_type>& rhs,
                                               const Vector<typename Op::scalar_type>* x0,
                                               const InnerConfig& cfg) {
  cfg.validate();
  detail::require_same_size(rhs.size(), op.dim(), "cg_solve");
  Stopwatch clock;
  CostLedger ledger;
  InnerResult<typename Op::scalar_type> out{detail::initial_guess(cfg, op.dim(), x0), {}};
  out.report.method = "cg";
  const double bnorm = ledger.overhead([&] { return norm(rhs); });
  detail::cg_loop(op, rhs, out.x, cfg, ledger, bnorm, out.report,
                  [](const auto&, double rr) { return std::sqrt(rr); });
  out.report.counters = ledger.core();
  out.report.overhead = ledger.overhead_counts();
  out.report.seconds = clock.seconds();
  return out;
}

/// Barzilai-Borwein gradient iteration on H x = rhs, stopping on the
/// gradient (= residual) norm.
template <LinearOperator Op>
InnerResult<typename Op::scalar_type> bb_solve(const Op& op,
                                               const Vector<typename Op::scalar_type>& rhs,
                                               const Vector<typename Op::scalar_type>* x0,
                                               const InnerConfig& cfg) {
  cfg.validate();
  detail::require_same_size(rhs.size(), op.dim(), "bb_solve");
  GradientStop stop;
  stop.tol = cfg.tol;
  stop.max_iters = cfg.cap(op.dim());
  stop.refresh_every = cfg.refresh_every;
  stop.min_iters = cfg.min_iters;
  stop.relative_to_initial = cfg.reference == ResidualReference::initial;
  auto res = run_gradient(Steplength::bb, op, rhs, detail::initial_guess(cfg, op.dim(), x0), stop,
                          GradientTrace::Memory::last_two);
  res.report.method = "bb";
  return {std::move(res.x), std::move(res.report)};
}

/// Solves (gamma I + S) x = rhs for skew-Hermitian S by CG on
/// gamma^2 I - S^2 with right-hand side (gamma I - S) rhs. Stopping uses the
/// residual of the original system, checked every iteration as overhead.
template <class Scalar>
InnerResult<Scalar> cgne_solve(double gamma, const CsrMatrix<Scalar>& s, const Vector<Scalar>& rhs,
                               const std::type_identity_t<Vector<Scalar>>* x0, const InnerConfig& cfg) {
  cfg.validate();
  if (!(gamma > 0.0)) throw std::invalid_argument("cgne_solve: gamma must be > 0");
  detail::require_same_size(rhs.size(), s.rows(), "cgne_solve");
  Stopwatch clock;
  CostLedger ledger;
  InnerResult<Scalar> out{detail::initial_guess(cfg, s.rows(), x0), {}};
  out.report.method = "cgne";

  const SkewNormalOperator<Scalar> normal(s, gamma);
  const ShiftedOperator<Scalar> plus(s, gamma, 1.0);
  const ShiftedOperator<Scalar> minus(s, gamma, -1.0);
  Vector<Scalar> rhs_normal(rhs.size());
  Vector<Scalar> work(rhs.size());
  const double bnorm = ledger.overhead([&] {
    minus.apply(rhs, rhs_normal);
    return norm(rhs);
  });
  auto monitor = [&](const Vector<Scalar>& x, double) {
    return ledger.overhead([&] {
      plus.apply(x, work);
      xpay(rhs, Scalar(-1), work);
      return norm(work);
    });
  };
  detail::cg_loop(normal, rhs_normal, out.x, cfg, ledger, bnorm, out.report, monitor);
  out.report.counters = ledger.core();
  out.report.overhead = ledger.overhead_counts();
  out.report.seconds = clock.seconds();
  return out;
}

}  // namespace hssgrad
