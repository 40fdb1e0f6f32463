#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hssgrad/hss.hpp"
#include "hssgrad/problems.hpp"
#include "support.hpp"

using namespace hssgrad;
using namespace hssgrad::fixtures;

namespace {

HssConfig direct_inner(double gamma) {
  HssConfig c;
  c.gamma = gamma;
  c.hermitian.method = InnerMethod::direct;
  c.skew.method = InnerMethod::direct;
  return c;
}

SplitOperator<Complex> hermitian_only(const CsrMatrix<Complex>& h) { return split(h); }

CsrMatrix<Complex> sum(const CsrMatrix<Complex>& x, const CsrMatrix<Complex>& y) {
  const DenseMatrix<Complex> d = to_dense(x) + to_dense(y);
  std::vector<Triplet<Complex>> t;
  for (Eigen::Index i = 0; i < d.rows(); ++i)
    for (Eigen::Index j = 0; j < d.cols(); ++j)
      if (d(i, j) != Complex(0)) t.push_back({std::size_t(i), std::size_t(j), d(i, j)});
  return CsrMatrix<Complex>::from_triplets(d.rows(), d.cols(), std::move(t));
}

ComplexVector uniform_rhs(std::size_t n, std::uint64_t seed) {
  return make_rhs({RhsSpec::Kind::complex_uniform, -10, 10, seed}, n);
}

}  // namespace

TEST(ContractionBound, Examples) {
  EXPECT_EQ(contraction_bound(3.0, 3.0, 3.0), 0.0);
  EXPECT_NEAR(contraction_bound(1.0, 2000.0, std::sqrt(2000.0)), 0.95626, 5e-6);
  const double k = std::sqrt(2000.0);
  EXPECT_NEAR(contraction_bound(1.0, 2000.0, k), (k - 1.0) / (k + 1.0), 1e-15);
  EXPECT_NEAR(contraction_bound(1.0, 2000.0, 1.0), 1999.0 / 2001.0, 1e-15);
  EXPECT_NEAR(contraction_bound(1.0, 2000.0, 1.0), 0.99900, 5e-6);
}

TEST(ContractionBound, OptimalShiftMinimizes) {
  const double gs = std::sqrt(2000.0);
  const double best = contraction_bound(1.0, 2000.0, gs);
  for (double f : {0.5, 0.9, 0.99, 1.01, 1.1, 2.0}) EXPECT_GT(contraction_bound(1.0, 2000.0, gs * f), best);
}

TEST(ContractionBound, ListOverloadAgreesOnExtremes) {
  const auto ev = diag8_spectrum().eigenvalues();
  for (double g : {0.3, 1.0, 44.0, 700.0}) {
    EXPECT_DOUBLE_EQ(contraction_bound(std::span<const double>(ev), g), contraction_bound(1.0, 2000.0, g));
  }
}

TEST(ContractionBound, Errors) {
  EXPECT_THROW(contraction_bound(0.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(contraction_bound(2.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(contraction_bound(1.0, 2.0, 0.0), std::invalid_argument);
  EXPECT_THROW(contraction_bound(std::span<const double>(), 1.0), std::invalid_argument);
}

TEST(IterationMatrix, HermitianCaseEqualsBound) {
  // With S = 0 the sweep collapses to (gI - H)(gI + H)^-1.
  const auto sp = hermitian_only(diag_matrix(diag8_spectrum()));
  for (double g : {1.0, std::sqrt(2000.0), 300.0}) {
    const auto t = iteration_matrix_dense(sp, g);
    EXPECT_NEAR(t.spectral_radius, contraction_bound(1.0, 2000.0, g), 1e-12) << g;
  }
}

TEST(IterationMatrix, Cd3dM3GuaranteedConvergence) {
  const Cd3dSpec spec{3, 1.0};
  const auto sp = split(cd3d(spec));
  const auto b = cd3d_hermitian_bounds(spec);
  for (double f : {0.5, 1.0, 2.0}) {
    const double g = f * b.gamma_star();
    const auto t = iteration_matrix_dense(sp, g);
    EXPECT_LT(t.spectral_radius, 1.0) << g;
    EXPECT_LE(t.spectral_radius, contraction_bound(b.lambda_min, b.lambda_max, g) + 1e-12) << g;
  }
}

TEST(IterationMatrix, RandomPositiveDefiniteInstances) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const std::size_t n = 10 + 7 * seed;
    const auto h = random_hpd(n, seed, 0.1);
    const auto s = random_skew(n, seed + 50, 2.0);
    const auto sp = split(sum(h, s));
    const auto ev = hermitian_eigenvalues(h);
    for (double g : {0.05, 1.0, 10.0}) {
      const auto t = iteration_matrix_dense(sp, g);
      EXPECT_LT(t.spectral_radius, 1.0);
      EXPECT_LE(t.spectral_radius, contraction_bound(std::span<const double>(ev), g) + 1e-12);
    }
  }
}

TEST(IterationMatrix, Guards) {
  const auto sp = split(cd3d({3, 1.0}));
  EXPECT_THROW(iteration_matrix_dense(sp, 0.0), std::invalid_argument);
  const auto big = split(cd3d({9, 1.0}));
  EXPECT_THROW(iteration_matrix_dense(big, 1.0), DimensionError);
}

TEST(Hss, ExactStartTakesNoIterations) {
  const auto a = cd3d({4, 1.0});
  const auto sp = split(a);
  const auto b = uniform_rhs(64, 2);
  const auto x = direct_solve(a, b);
  const auto r = hss_solve(sp, b, HssConfig{}, x);
  EXPECT_EQ(r.report.outer_iterations, 0u);
  EXPECT_TRUE(r.report.converged());
  EXPECT_EQ(r.report.residual_history.size(), 1u);
}

TEST(Hss, HermitianSystemContractsAtBound) {
  const auto sp = hermitian_only(diag_matrix(diag8_spectrum()));
  const ComplexVector b = random_complex(8, 3);
  const double g = std::sqrt(2000.0);
  // Residuals obey r_{n+1} = T r_n here, so each sweep contracts by at most
  // the bound; tol stays well above the roundoff floor of the ratio.
  auto cfg = direct_inner(g);
  cfg.tol = 1e-6;
  const auto r = hss_solve(sp, b, cfg);
  ASSERT_TRUE(r.report.converged());
  const double bound = contraction_bound(1.0, 2000.0, g);
  const auto& h = r.report.residual_history;
  double worst = 0.0;
  for (std::size_t k = 1; k < h.size(); ++k) worst = std::max(worst, h[k] / h[k - 1]);
  EXPECT_LE(worst, bound + 1e-6);
  // the slowest mode (lambda = 1) dominates, so late ratios approach the bound
  EXPECT_NEAR(h[h.size() - 1] / h[h.size() - 2], bound, 1e-3);
}

TEST(Hss, MatchesDirectSolution) {
  const auto a = cd3d({6, 1.0});
  const auto sp = split(a);
  const auto b = uniform_rhs(216, 4);
  auto cfg = direct_inner(1.5);
  cfg.tol = 1e-10;
  const auto r = hss_solve(sp, b, cfg);
  ASSERT_TRUE(r.report.converged());
  const auto x = direct_solve(a, b);
  ComplexVector d = r.x;
  axpy(Complex(-1), x, d);
  EXPECT_LE(norm(d) / norm(x), 1e-8);
  EXPECT_NEAR(r.report.final_rel_residual, true_relative_residual(a, b, r.x), 1e-18);
}

TEST(Hss, IterativeInnerTracksDirectInner) {
  const auto sp = split(cd3d({6, 1.0}));
  const auto b = uniform_rhs(216, 5);
  const auto exact = hss_solve(sp, b, direct_inner(1.5));
  HssConfig cfg;
  cfg.gamma = 1.5;
  const auto cg = hss_solve(sp, b, cfg);
  ASSERT_TRUE(cg.report.converged());
  ASSERT_TRUE(exact.report.converged());
  EXPECT_LE(cg.report.outer_iterations, exact.report.outer_iterations + 5);
  EXPECT_EQ(cg.report.inner_hermitian.size(), cg.report.outer_iterations);
  EXPECT_EQ(cg.report.inner_skew.size(), cg.report.outer_iterations);
}

TEST(Hss, BbInnerConverges) {
  const auto sp = split(cd3d({6, 1.0}));
  auto cfg = race_preset(InnerMethod::bb);
  cfg.hermitian.tol = 1e-2;
  const auto r = hss_solve(sp, uniform_rhs(216, 6), cfg);
  EXPECT_TRUE(r.report.converged());
  EXPECT_EQ(r.report.gamma, 1.0);
  EXPECT_LE(r.report.final_rel_residual, 1e-6);
}

TEST(Hss, LooseBbInnerCanDivergeOnSmallGrids) {
  // eps1 = 1e-1 lets two BB steps pass every time; the resulting fixed inner
  // polynomial does not damp the smooth modes and the outer loop grows.
  const auto sp = split(cd3d({6, 1.0}));
  auto cfg = race_preset(InnerMethod::bb);
  cfg.max_outer = 200;
  const auto r = hss_solve(sp, uniform_rhs(216, 6), cfg);
  EXPECT_EQ(r.report.status, SolveStatus::max_iters);
  EXPECT_GT(r.report.residual_history.back(), r.report.residual_history.front());
  cfg.hermitian.method = InnerMethod::cg;
  EXPECT_TRUE(hss_solve(sp, uniform_rhs(216, 6), cfg).report.converged());
}

TEST(Hss, CountersAggregatePhases) {
  const auto sp = split(cd3d({5, 1.0}));
  HssConfig cfg;
  cfg.gamma = 1.2;
  const auto r = hss_solve(sp, uniform_rhs(125, 7), cfg);
  ASSERT_TRUE(r.report.converged());
  const OpCounts phases = r.report.hermitian_counts + r.report.skew_counts;
  EXPECT_GE(r.report.counters.matvecs, phases.matvecs + r.report.outer_iterations);
  EXPECT_GE(r.report.counters.dots, phases.dots);
  EXPECT_GT(r.report.hermitian_counts.matvecs, 0u);
  EXPECT_GT(r.report.skew_counts.matvecs, 0u);
  EXPECT_EQ(r.report.estimation_counts, OpCounts{});
  EXPECT_FALSE(r.report.estimate.has_value());
}

TEST(Hss, CapGivesMaxIters) {
  const auto sp = split(cd3d({5, 1.0}));
  HssConfig cfg;
  cfg.max_outer = 2;
  const auto r = hss_solve(sp, uniform_rhs(125, 7), cfg);
  EXPECT_EQ(r.report.status, SolveStatus::max_iters);
  EXPECT_EQ(r.report.outer_iterations, 2u);
  EXPECT_EQ(r.report.residual_history.size(), 3u);
}

TEST(Hss, IndefiniteHermitianPartBreaksDown) {
  // gamma I + H indefinite when H has an eigenvalue below -gamma
  const auto h = CsrMatrix<Complex>::diagonal({Complex(1), Complex(-5), Complex(2)});
  const auto r = hss_solve(hermitian_only(h), ComplexVector({Complex(1), Complex(1), Complex(1)}), HssConfig{});
  EXPECT_EQ(r.report.status, SolveStatus::breakdown);
  EXPECT_NE(r.report.diagnostic.find("Hermitian"), std::string::npos);
}

TEST(Hss, ConfigValidation) {
  const auto sp = split(cd3d({3, 1.0}));
  const ComplexVector b(27, Complex(1));
  HssConfig c;
  c.gamma = 0.0;
  EXPECT_THROW(hss_solve(sp, b, c), std::invalid_argument);
  c = {};
  c.tol = 1.0;
  EXPECT_THROW(hss_solve(sp, b, c), std::invalid_argument);
  c = {};
  c.hermitian.method = InnerMethod::cgne;
  EXPECT_THROW(hss_solve(sp, b, c), std::invalid_argument);
  c = {};
  c.skew.method = InnerMethod::cg;
  EXPECT_THROW(hss_solve(sp, b, c), std::invalid_argument);
  EXPECT_THROW(hss_solve(sp, ComplexVector(5), HssConfig{}), DimensionError);
}

TEST(Hss, GammaValleyOnCd3dM9) {
  const auto sp = split(cd3d({9, 1.0}));
  const auto b = uniform_rhs(sp.dim(), 1);
  double best_gamma = 0.0;
  std::size_t best = SIZE_MAX;
  for (int i = 0; i <= 12; ++i) {
    HssConfig cfg;
    cfg.gamma = 0.5 + 0.25 * i;
    const auto r = hss_solve(sp, b, cfg);
    ASSERT_TRUE(r.report.converged()) << cfg.gamma;
    if (r.report.outer_iterations < best) {
      best = r.report.outer_iterations;
      best_gamma = cfg.gamma;
    }
  }
  EXPECT_LE(std::abs(best_gamma - 6.0 * std::sin(std::numbers::pi / 10.0)), 0.75);
}

TEST(Pahss, Cd3dM16EndToEnd) {
  const auto sp = split(cd3d({16, 1.0}));
  const auto b = uniform_rhs(sp.dim(), 1);
  const auto r = pahss_solve(sp, b, EstimatorConfig{}, HssConfig{});
  ASSERT_TRUE(r.report.converged());
  EXPECT_LE(r.report.final_rel_residual, 1e-6);
  EXPECT_LE(true_relative_residual(sp.a, b, r.x), 1e-6);
  ASSERT_TRUE(r.report.estimate.has_value());
  EXPECT_EQ(r.report.gamma, r.report.estimate->value);
  EXPECT_GT(r.report.estimation_counts.matvecs, 0u);
  EXPECT_EQ(r.report.counters,
            r.report.estimation_counts + (r.report.counters - r.report.estimation_counts));
  EXPECT_GE(r.report.seconds, r.report.seconds_estimate);
}

TEST(Pahss, HermitianDiag8ContractionAtEstimate) {
  const auto sp = hermitian_only(diag_matrix(diag8_spectrum()));
  EstimatorConfig est;
  est.eta = 5000;
  est.stagnation_tol = 1e-300;
  auto cfg = direct_inner(1.0);
  const auto r = pahss_solve(sp, random_complex(8, 9), est, cfg);
  ASSERT_TRUE(r.report.converged());
  EXPECT_LE(rel_err(r.report.gamma, std::sqrt(2000.0)), 5e-3);
  const double bound = contraction_bound(1.0, 2000.0, r.report.gamma);
  EXPECT_LE(bound, 0.95626 + 1e-4);
  const auto& h = r.report.residual_history;
  for (std::size_t k = 1; k < h.size(); ++k) EXPECT_LE(h[k] / h[k - 1], bound + 1e-6) << k;
}

TEST(Pahss, LargerEtaDoesNotHurt) {
  const auto sp = split(cd3d({16, 1.0}));
  const auto b = uniform_rhs(sp.dim(), 2);
  auto outer = [&](std::size_t eta) {
    EstimatorConfig est;
    est.eta = eta;
    return pahss_solve(sp, b, est, HssConfig{}).report.outer_iterations;
  };
  const auto o5 = outer(5), o50 = outer(50), o100 = outer(100);
  EXPECT_LE(o50, o5 + 2);
  EXPECT_LE(o50 > o100 ? o50 - o100 : o100 - o50, 2u);
}

TEST(Pahss, EstimationFailurePropagates) {
  const auto h = CsrMatrix<Complex>::diagonal({Complex(1), Complex(-1)});
  EstimatorConfig est;
  est.eta = 4;
  EXPECT_ANY_THROW(pahss_solve(hermitian_only(h), ComplexVector({Complex(1), Complex(1)}), est, HssConfig{}));
}
