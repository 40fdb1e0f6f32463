#pragma once

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "counters.hpp"
#include "errors.hpp"
#include "report.hpp"
#include "sparse.hpp"
#include "vector.hpp"

namespace hssgrad {

/// Steplength rules for gradient iterations on Hermitian positive definite
/// systems H x = b.
///
///   sd   <g,g>/<g,Hg>        steepest descent (Cauchy)
///   mg   <g,Hg>/<g,H^2 g>    minimal gradient
///   bb   sd of the previous iterate
///   bb2  mg of the previous iterate
enum class Steplength { sd, mg, bb, bb2 };

/// Which steplength family the auxiliary quantities are built from.
enum class Lineage { sd, mg };

constexpr Lineage lineage_of(Steplength k) {
  return (k == Steplength::mg || k == Steplength::bb2) ? Lineage::mg : Lineage::sd;
}

constexpr std::string_view to_string(Steplength k) {
  switch (k) {
    case Steplength::sd: return "sd";
    case Steplength::mg: return "mg";
    case Steplength::bb: return "bb";
    case Steplength::bb2: return "bb2";
  }
  return "?";
}

constexpr std::string_view to_string(Lineage l) { return l == Lineage::sd ? "sd" : "mg"; }

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Scalars available at the current iterate. `curvature2` is <Hg,Hg>, which
/// equals <g,H^2 g> for Hermitian H; only needed by the mg lineage.
struct StepState {
  double grad_norm2 = 0.0;
  double energy = 0.0;
  double curvature2 = kNaN;
  std::optional<double> prev_sd;
  std::optional<double> prev_mg;
};

/// Returns nullopt for a zero gradient (the iterate is already the solution).
/// bb/bb2 without a previous step fall back to sd/mg of the current state.
inline std::optional<double> steplength(Steplength kind, const StepState& s) {
  if (s.grad_norm2 == 0.0) return std::nullopt;
  if (!(s.energy > 0.0)) {
    throw NotPositiveDefinite("steplength: nonpositive Rayleigh quotient <g,Hg> = " +
                              std::to_string(s.energy));
  }
  auto mg_now = [&] {
    if (!(s.curvature2 > 0.0)) throw std::invalid_argument("steplength: mg needs <Hg,Hg> > 0");
    return s.energy / s.curvature2;
  };
  switch (kind) {
    case Steplength::sd: return s.grad_norm2 / s.energy;
    case Steplength::mg: return mg_now();
    case Steplength::bb: return s.prev_sd ? *s.prev_sd : s.grad_norm2 / s.energy;
    case Steplength::bb2: return s.prev_mg ? *s.prev_mg : mg_now();
  }
  return std::nullopt;
}

/// One gradient iteration as recorded: the step taken from g_n and the
/// scalars needed for the auxiliary quantities.
struct GradientRecord {
  std::size_t n = 0;
  double alpha = kNaN;
  double grad_norm2 = kNaN;  ///< <g_n, g_n>
  double energy = kNaN;      ///< <g_n, H g_n>
  double curvature2 = kNaN;  ///< <H g_n, H g_n>, mg lineage only
  double sd = kNaN;
  double mg = kNaN;

  double grad_norm() const { return std::sqrt(grad_norm2); }
};

/// Auxiliary quantities from two consecutive records. alpha_y / alpha_z are
/// absent whenever the discriminant is negative (or the quadratic has no
/// positive second root).
struct DerivedQuantities {
  double alpha_a = kNaN;
  double alpha_ra = kNaN;
  double gamma = kNaN;
  double discriminant = kNaN;
  std::optional<double> alpha_y;
  std::optional<double> alpha_z;
};

inline DerivedQuantities derived_quantities(const GradientRecord& prev, const GradientRecord& cur,
                                            Lineage lineage) {
  const double a0 = lineage == Lineage::sd ? prev.sd : prev.mg;
  const double a1 = lineage == Lineage::sd ? cur.sd : cur.mg;
  const double w0 = lineage == Lineage::sd ? prev.grad_norm2 : prev.energy;
  const double w1 = lineage == Lineage::sd ? cur.grad_norm2 : cur.energy;
  if (!std::isfinite(a0) || !std::isfinite(a1)) {
    throw std::invalid_argument("derived_quantities: lineage steplengths were not recorded");
  }

  DerivedQuantities d;
  d.alpha_ra = 1.0 / a0 + 1.0 / a1;
  d.alpha_a = 1.0 / d.alpha_ra;
  d.gamma = 1.0 / (a0 * a1) - w1 / (a0 * a0 * w0);
  d.discriminant = d.alpha_ra * d.alpha_ra - 4.0 * d.gamma;
  if (d.discriminant >= 0.0) {
    const double big = d.alpha_ra + std::sqrt(d.discriminant);
    d.alpha_y = 2.0 / big;
    // Second root via the product of roots; avoids cancellation in ra - sqrt(disc).
    if (d.gamma > 0.0) d.alpha_z = big / (2.0 * d.gamma);
  }
  return d;
}

/// Q_n(alpha) = Gamma alpha^2 - alpha_ra alpha + 1, with roots alpha_y and
/// alpha_z.
constexpr double q_eval(double gamma, double alpha_ra, double alpha) {
  return gamma * alpha * alpha - alpha_ra * alpha + 1.0;
}

/// Per-iteration history. `last_two` keeps only the two newest records,
/// which is all the shift estimators need.
class GradientTrace {
 public:
  enum class Memory { full, last_two };

  explicit GradientTrace(Memory memory = Memory::full) : memory_(memory) {}

  void push(const GradientRecord& r) {
    records_.push_back(r);
    ++total_;
    if (memory_ == Memory::last_two && records_.size() > 2) records_.erase(records_.begin());
  }

  /// Number of iterations recorded, including discarded ones.
  std::size_t size() const { return total_; }
  bool empty() const { return total_ == 0; }
  Memory memory() const { return memory_; }

  const GradientRecord& operator[](std::size_t n) const {
    const std::size_t first = total_ - records_.size();
    if (n < first || n >= total_) {
      throw std::out_of_range("GradientTrace: record " + std::to_string(n) + " not retained");
    }
    return records_[n - first];
  }
  const GradientRecord& back() const { return records_.back(); }

  DerivedQuantities derived(std::size_t n, Lineage lineage) const {
    if (n == 0) throw InsufficientHistory("derived quantities need n >= 1");
    return derived_quantities((*this)[n - 1], (*this)[n], lineage);
  }

  /// Columns: n, alpha, grad_norm, alpha_a, gamma_sqrt, alpha_y, alpha_z,
  /// discriminant. Undefined entries are left empty.
  void write_csv(std::ostream& out, Lineage lineage) const {
    out << "n,alpha,grad_norm,alpha_a,gamma_sqrt,alpha_y,alpha_z,discriminant\n";
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    const std::size_t first = total_ - records_.size();
    for (std::size_t n = first; n < total_; ++n) {
      const auto& r = (*this)[n];
      out << n << ',' << r.alpha << ',' << r.grad_norm() << ',';
      if (n > first) {
        const auto d = derived(n, lineage);
        out << d.alpha_a << ',';
        if (d.gamma >= 0.0) out << std::sqrt(d.gamma);
        out << ',';
        if (d.alpha_y) out << *d.alpha_y;
        out << ',';
        if (d.alpha_z) out << *d.alpha_z;
        out << ',' << d.discriminant;
      } else {
        out << ",,,,";
      }
      out << '\n';
    }
  }

 private:
  Memory memory_;
  std::vector<GradientRecord> records_;
  std::size_t total_ = 0;
};

/// x <- x - alpha g, g <- g - alpha Hg. Two counted vector updates.
template <class Scalar>
void gradient_update(Vector<Scalar>& x, Vector<Scalar>& g, real_t<Scalar> alpha,
                     const Vector<Scalar>& hg) {
  axpy(Scalar(-alpha), g, x);
  axpy(Scalar(-alpha), hg, g);
}

/// Stateful gradient iteration for H x = b with g = H x - b.
///
/// One operator application per step; H g is reused for the steplength and
/// the gradient update. Per-step cost: 1 matvec, 2 updates, 2 dots (sd/bb)
/// or 3 dots (mg/bb2).
template <LinearOperator Op>
class GradientIteration {
 public:
  using Scalar = typename Op::scalar_type;

  GradientIteration(const Op& op, const Vector<Scalar>& b, Vector<Scalar> x0, Steplength kind)
      : op_(&op), b_(b), x_(std::move(x0)), g_(op.dim()), hg_(op.dim()), kind_(kind) {
    detail::require_same_size(b_.size(), op.dim(), "GradientIteration rhs");
    detail::require_same_size(x_.size(), op.dim(), "GradientIteration x0");
    refresh();
  }
  GradientIteration(const Op&&, const Vector<Scalar>&, Vector<Scalar>, Steplength) = delete;

  /// Recomputes g = H x - b from scratch.
  void refresh() {
    op_->apply(x_, g_);
    axpy(Scalar(-1), b_, g_);
    grad_norm2_ = detail::real_part(dot(g_, g_));
  }

  /// Performs iteration n; nullopt if the gradient is exactly zero.
  std::optional<GradientRecord> step() {
    if (grad_norm2_ == 0.0) return std::nullopt;
    const bool mg_lineage = lineage_of(kind_) == Lineage::mg;

    op_->apply(g_, hg_);
    StepState s;
    s.grad_norm2 = grad_norm2_;
    s.energy = detail::real_part(dot(g_, hg_));
    if (mg_lineage && s.energy > 0.0) s.curvature2 = detail::real_part(dot(hg_, hg_));
    if (last_) {
      s.prev_sd = last_->sd;
      if (mg_lineage) s.prev_mg = last_->mg;
    }
    const double alpha = *steplength(kind_, s);

    GradientRecord r;
    r.n = n_;
    r.alpha = alpha;
    r.grad_norm2 = s.grad_norm2;
    r.energy = s.energy;
    r.curvature2 = s.curvature2;
    r.sd = s.grad_norm2 / s.energy;
    if (mg_lineage) r.mg = s.energy / s.curvature2;

    gradient_update(x_, g_, alpha, hg_);
    grad_norm2_ = detail::real_part(dot(g_, g_));
    last_ = r;
    ++n_;
    return r;
  }

  const Vector<Scalar>& x() const { return x_; }
  Vector<Scalar> take_x() { return std::move(x_); }
  const Vector<Scalar>& gradient() const { return g_; }
  double grad_norm2() const { return grad_norm2_; }
  std::size_t iteration() const { return n_; }
  Steplength kind() const { return kind_; }

 private:
  const Op* op_;
  Vector<Scalar> b_;
  Vector<Scalar> x_;
  Vector<Scalar> g_;
  Vector<Scalar> hg_;
  Steplength kind_;
  double grad_norm2_ = 0.0;
  std::size_t n_ = 0;
  std::optional<GradientRecord> last_;
};

struct GradientStop {
  double tol = 1e-6;             ///< on ||g_n|| / ||b||
  std::size_t max_iters = 10000;
  std::size_t refresh_every = 50;  ///< true-gradient recomputation period
  std::size_t min_iters = 0;
  bool relative_to_initial = false;  ///< divide by ||g_0|| instead of ||b||
};

template <class Scalar>
struct GradientResult {
  Vector<Scalar> x;
  GradientTrace trace;
  SolveReport report;
};

/// Runs a gradient method from x0 until ||g_n|| <= tol ||b|| (or tol ||g_0||)
/// or the cap.
/// A nonpositive Rayleigh quotient throws NotPositiveDefinite.
template <LinearOperator Op>
GradientResult<typename Op::scalar_type> run_gradient(
    Steplength kind, const Op& op, const Vector<typename Op::scalar_type>& b,
    Vector<typename Op::scalar_type> x0, const GradientStop& stop = {},
    GradientTrace::Memory memory = GradientTrace::Memory::full) {
  using Scalar = typename Op::scalar_type;
  Stopwatch clock;
  CostLedger ledger;
  GradientResult<Scalar> out{{}, GradientTrace(memory), {}};
  out.report.method = std::string(to_string(kind));

  const double bnorm = ledger.overhead([&] { return norm(b); });
  auto it = ledger.overhead([&] { return GradientIteration<Op>(op, b, std::move(x0), kind); });
  const double ref = stop.relative_to_initial ? std::sqrt(it.grad_norm2()) : bnorm;
  const double scale = ref > 0.0 ? ref : 1.0;

  auto rel = [&] { return std::sqrt(it.grad_norm2()) / scale; };
  out.report.residual_history.push_back(rel());
  for (std::size_t k = 0;; ++k) {
    if (k >= stop.min_iters && rel() <= stop.tol) {
      out.report.status = SolveStatus::converged;
      break;
    }
    if (k >= stop.max_iters) {
      out.report.status = SolveStatus::max_iters;
      break;
    }
    auto rec = it.step();
    if (!rec) {
      out.report.status = SolveStatus::converged;
      break;
    }
    out.trace.push(*rec);
    ++out.report.iterations;
    if (stop.refresh_every > 0 && (k + 1) % stop.refresh_every == 0) {
      ledger.overhead([&] { it.refresh(); });
    }
    out.report.residual_history.push_back(rel());
  }
  out.report.final_rel_residual = rel();
  out.report.counters = ledger.core();
  out.report.overhead = ledger.overhead_counts();
  out.report.seconds = clock.seconds();
  out.x = it.take_x();
  return out;
}

}  // namespace hssgrad
