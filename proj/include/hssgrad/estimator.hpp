#pragma once

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "graditer.hpp"
#include "report.hpp"
#include "sparse.hpp"
#include "split.hpp"

namespace hssgrad {

/// direct: gradient iteration on H itself, estimate sqrt(Gamma_n).
/// shifted: iteration on gamma I + H for a fixed gamma, estimate
/// sqrt(Gamma_n - gamma alpha_ra_n + gamma^2).
enum class EstimatorMode { direct, shifted };

enum class EstimateStop { stagnated, eta_exhausted, gradient_vanished };

/// Right-hand side of the estimation run inside preadapt().
enum class EstimationRhs { ones, system };

constexpr std::string_view to_string(EstimateStop s) {
  switch (s) {
    case EstimateStop::stagnated: return "stagnated";
    case EstimateStop::eta_exhausted: return "eta-exhausted";
    case EstimateStop::gradient_vanished: return "gradient-vanished";
  }
  return "?";
}

constexpr std::string_view to_string(EstimatorMode m) {
  return m == EstimatorMode::direct ? "direct" : "shifted";
}

struct EstimatorConfig {
  Lineage lineage = Lineage::sd;
  EstimatorMode mode = EstimatorMode::direct;
  double shift = 1.0;  ///< shifted mode only
  std::size_t eta = 50;  ///< maximum number of gradient iterations
  double stagnation_tol = 1e-2;
  std::size_t stagnation_window = 3;
  double gamma_floor = 0.0;  ///< 0 disables the floor
  /// The run ends once ||g_n|| <= vanish_tol ||b||; below that the
  /// auxiliary quantities are dominated by rounding.
  double vanish_tol = 1e-10;
  EstimationRhs rhs = EstimationRhs::ones;

  void validate() const {
    if (eta < 2) throw std::invalid_argument("estimator: eta must be >= 2");
    if (!(stagnation_tol > 0.0)) throw std::invalid_argument("estimator: stagnation tol must be > 0");
    if (stagnation_window < 1) throw std::invalid_argument("estimator: window must be >= 1");
    if (mode == EstimatorMode::shifted && !(shift > 0.0)) {
      throw std::invalid_argument("estimator: shifted mode needs gamma > 0");
    }
    if (gamma_floor < 0.0) throw std::invalid_argument("estimator: gamma floor must be >= 0");
  }
};

struct EstimateRecord {
  std::size_t n = 0;
  double gamma_hat = kNaN;  ///< carried-over value when not accepted
  double radicand = kNaN;
  bool accepted = false;
};

struct GammaEstimate {
  double value = kNaN;
  std::size_t iterations = 0;
  std::vector<EstimateRecord> history;
  EstimateStop reason = EstimateStop::eta_exhausted;
  SolveReport report;  ///< cost and timing of the gradient run
};

inline void write_estimate_csv(std::ostream& out, const GammaEstimate& est) {
  out << "n,gamma_hat,radicand,accepted\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : est.history) {
    out << r.n << ',';
    if (std::isfinite(r.gamma_hat)) out << r.gamma_hat;
    out << ',';
    if (std::isfinite(r.radicand)) out << r.radicand;
    out << ',' << (r.accepted ? "true" : "false") << '\n';
  }
}

namespace detail {

/// Shared driver. `shift` is 0 for the direct estimators, in which case the
/// radicand reduces to Gamma_n exactly.
template <LinearOperator Op>
GammaEstimate run_estimator(const Op& op, double shift,
                            const Vector<typename Op::scalar_type>& rhs,
                            const EstimatorConfig& cfg) {
  using Scalar = typename Op::scalar_type;
  cfg.validate();
  Stopwatch clock;
  CostLedger ledger;
  GammaEstimate est;
  est.report.method = cfg.lineage == Lineage::sd ? "sd-estimator" : "mg-estimator";

  const double bnorm = ledger.overhead([&] { return norm(rhs); });
  if (!(bnorm > 0.0)) throw std::invalid_argument("estimator: right-hand side is zero");
  const Steplength kind = cfg.lineage == Lineage::sd ? Steplength::sd : Steplength::mg;
  auto it = ledger.overhead(
      [&] { return GradientIteration<Op>(op, rhs, Vector<Scalar>(op.dim()), kind); });

  std::optional<GradientRecord> prev;
  std::optional<GradientRecord> first;
  std::optional<double> last_accepted;
  std::size_t hits = 0;
  bool stopped = false;
  est.report.residual_history.push_back(std::sqrt(it.grad_norm2()) / bnorm);

  while (it.iteration() < cfg.eta) {
    if (std::sqrt(it.grad_norm2()) <= cfg.vanish_tol * bnorm) {
      est.reason = EstimateStop::gradient_vanished;
      stopped = true;
      break;
    }
    const auto rec = it.step();
    if (!rec) {
      est.reason = EstimateStop::gradient_vanished;
      stopped = true;
      break;
    }
    est.report.residual_history.push_back(std::sqrt(it.grad_norm2()) / bnorm);
    if (!prev) {
      first = rec;
      prev = rec;
      continue;
    }
    const auto d = derived_quantities(*prev, *rec, cfg.lineage);
    prev = rec;

    EstimateRecord er;
    er.n = rec->n;
    er.radicand = d.gamma - shift * d.alpha_ra + shift * shift;
    if (er.radicand > 0.0 && std::isfinite(er.radicand)) {
      er.gamma_hat = std::sqrt(er.radicand);
      er.accepted = true;
      if (last_accepted && std::abs(er.gamma_hat - *last_accepted) <= cfg.stagnation_tol * er.gamma_hat) {
        ++hits;
      } else {
        hits = 0;
      }
      last_accepted = er.gamma_hat;
    } else {
      er.gamma_hat = last_accepted.value_or(kNaN);
      hits = 0;
    }
    est.history.push_back(er);
    if (hits >= cfg.stagnation_window) {
      est.reason = EstimateStop::stagnated;
      stopped = true;
      break;
    }
  }
  if (!stopped) est.reason = EstimateStop::eta_exhausted;

  est.iterations = it.iteration();
  est.report.iterations = est.iterations;
  est.report.final_rel_residual = est.report.residual_history.back();
  est.report.status = SolveStatus::converged;
  est.report.counters = ledger.core();
  est.report.overhead = ledger.overhead_counts();
  est.report.seconds = clock.seconds();

  if (last_accepted) {
    est.value = *last_accepted;
    return est;
  }
  // One-point spectrum: the gradient vanished before any Gamma_n existed, so
  // the Rayleigh quotient of the initial gradient is the only eigenvalue.
  if (est.reason == EstimateStop::gradient_vanished && first && est.history.empty()) {
    const double rq = 1.0 / (cfg.lineage == Lineage::sd ? first->sd : first->mg) - shift;
    if (rq > 0.0) {
      est.value = rq;
      est.history.push_back({0, rq, kNaN, true});
      return est;
    }
  }
  throw EstimationFailed("estimator: no valid shift estimate after " +
                         std::to_string(est.iterations) + " iterations");
}

}  // namespace detail

/// Estimates gamma* = sqrt(lambda_1(H) lambda_N(H)) from a gradient run on
/// H x = rhs started at zero: sqrt(Gamma_n) for the sd lineage, sqrt of the
/// H-weighted analogue for mg.
template <LinearOperator Op>
GammaEstimate estimate_direct(const Op& h, const Vector<typename Op::scalar_type>& rhs,
                              const EstimatorConfig& cfg) {
  return detail::run_estimator(h, 0.0, rhs, cfg);
}

/// Same target from a run on M1 = gamma I + H, using
/// lambda_i(M1) = gamma + lambda_i(H).
template <LinearOperator Op>
GammaEstimate estimate_shifted(const Op& m1, double gamma,
                               const Vector<typename Op::scalar_type>& rhs,
                               const EstimatorConfig& cfg) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("estimate_shifted: gamma must be >= 0");
  return detail::run_estimator(m1, gamma, rhs, cfg);
}

/// Shift estimate for a split system: picks the estimation right-hand side,
/// dispatches on the mode and applies the optional floor.
template <class Scalar>
GammaEstimate preadapt(const SplitOperator<Scalar>& sp, const Vector<Scalar>& b,
                       const EstimatorConfig& cfg) {
  cfg.validate();
  detail::require_same_size(sp.dim(), b.size(), "preadapt");
  Vector<Scalar> rhs = (cfg.rhs == EstimationRhs::system && !b.is_zero())
                           ? b
                           : Vector<Scalar>(b.size(), Scalar{1});
  GammaEstimate est = cfg.mode == EstimatorMode::direct
                          ? estimate_direct(sp.h, rhs, cfg)
                          : estimate_shifted(ShiftedOperator<Scalar>(sp.h, cfg.shift), cfg.shift,
                                             rhs, cfg);
  if (cfg.gamma_floor > 0.0 && est.value < cfg.gamma_floor) est.value = cfg.gamma_floor;
  return est;
}

}  // namespace hssgrad
