// Acceptance run: one PASS/FAIL line per criterion.
//
// Usage: acceptance [--known-infeasible AC1,AC4,...]
// Exit status is 0 when every failing criterion is in the known-infeasible
// list, 1 otherwise.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../support.hpp"
#include "hssgrad/bench/audit.hpp"
#include "hssgrad/dense.hpp"
#include "hssgrad/estimator.hpp"
#include "hssgrad/graditer.hpp"
#include "hssgrad/hss.hpp"
#include "hssgrad/inner.hpp"
#include "hssgrad/krylov.hpp"
#include "hssgrad/problems.hpp"
#include "hssgrad/realify.hpp"

using namespace hssgrad;
using hssgrad::fixtures::random_complex;
using hssgrad::fixtures::random_hpd;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[fail: " << what << "] ";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }

ComplexVector uniform_rhs(std::size_t n, std::uint64_t seed) {
  return make_rhs({RhsSpec::Kind::complex_uniform, -10.0, 10.0, seed}, n);
}

ComplexVector diag8_rhs() {
  return make_rhs_from_solution(diag_matrix(diag8_spectrum()), ComplexVector(8, Complex(1)));
}

/// ||b - A x|| / ||b|| from a freshly assembled matrix and a hand-written
/// row loop, independent of the solver's own residual bookkeeping.
double recomputed_residual(const CsrMatrix<Complex>& a, const ComplexVector& b, const ComplexVector& x) {
  double rr = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    Complex s = b[i];
    for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) s -= a.values()[k] * x[a.col_idx()[k]];
    rr += std::norm(s);
    bb += std::norm(b[i]);
  }
  return std::sqrt(rr / bb);
}

// 1. Asymptotic limits of the auxiliary steplengths.
Outcome ac1() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto h = diag_matrix(diag8_spectrum());
  auto res = run_gradient(Steplength::sd, h, diag8_rhs(), ComplexVector(8), {0.0, 500, 0});
  const double secs = seconds_since(t0);
  const auto d = res.trace.derived(499, Lineage::sd);
  const double e_a = std::abs(d.alpha_a - 1.0 / 2001.0) * 2001.0;
  const double e_g = std::abs(d.gamma - 2000.0) / 2000.0;
  const double e_y = d.alpha_y ? std::abs(*d.alpha_y - 1.0 / 2000.0) * 2000.0 : INFINITY;
  const double e_z = d.alpha_z ? std::abs(*d.alpha_z - 1.0) : INFINITY;
  o.check(res.trace.size() == 500, "500 iterations");
  o.check(e_a <= 1e-4, "alpha_A");
  o.check(e_g <= 1e-3, "Gamma_n");
  o.check(e_y <= 1e-3, "alpha_Y");
  o.check(e_z <= 1e-3, "alpha_Z");
  o.check(secs < 1.0, "runtime");
  o.detail << "n=500 err alpha_A=" << e_a << " Gamma=" << e_g << " alpha_Y=" << e_y << " alpha_Z=" << e_z
           << " t=" << secs << "s";
  return o;
}

// 2. Q_n identities at every iteration.
Outcome ac2() {
  Outcome o;
  const auto h = random_hpd(50, 2024);
  const auto b = random_complex(50, 2025);
  auto res = run_gradient(Steplength::sd, h, b, ComplexVector(50), {0.0, 100, 0});
  o.check(res.trace.size() == 100, "100 iterations");
  double worst = 0.0;
  for (std::size_t n = 1; n < res.trace.size(); ++n) {
    const auto& p = res.trace[n - 1];
    const auto& c = res.trace[n];
    const auto d = res.trace.derived(n, Lineage::sd);
    const double w1 = -c.grad_norm2 / p.grad_norm2;
    const double w2 = -(c.alpha * c.alpha * c.grad_norm2) / (p.alpha * p.alpha * p.grad_norm2);
    worst = std::max({worst, rel(q_eval(d.gamma, d.alpha_ra, p.alpha), w1),
                      rel(q_eval(d.gamma, d.alpha_ra, c.alpha), w2)});
  }
  o.check(worst <= 1e-10, "identity");
  o.detail << "max rel err " << worst;
  return o;
}

// 3. Complex SD and SD on the real embedding share steplengths.
Outcome ac3() {
  Outcome o;
  const auto h = random_hpd(40, 3031);
  const auto b = random_complex(40, 3032);
  const auto [hr, br] = realify(h, b);
  GradientIteration<CsrMatrix<Complex>> c(h, b, ComplexVector(40), Steplength::sd);
  GradientIteration<CsrMatrix<double>> r(hr, br, RealVector(80), Steplength::sd);
  double worst = 0.0;
  for (int n = 0; n < 50; ++n) {
    const auto a = c.step();
    const auto ar = r.step();
    if (!a || !ar) {
      o.check(false, "early stop");
      break;
    }
    worst = std::max(worst, rel(ar->alpha, a->alpha));
  }
  o.check(worst <= 1e-12, "steplengths");
  o.detail << "max rel diff " << worst;
  return o;
}

// 4. Four estimator modes on the 8-point diagonal.
Outcome ac4() {
  Outcome o;
  const auto sp = split(diag_matrix(diag8_spectrum()));
  const ComplexVector b = diag8_rhs();
  const double target = std::sqrt(2000.0);
  auto estimate = [&](Lineage l, EstimatorMode m, std::size_t eta) {
    EstimatorConfig c;
    c.lineage = l;
    c.mode = m;
    c.shift = 1.0;
    c.eta = eta;
    c.stagnation_tol = 1e-300;  // run the whole budget
    return preadapt(sp, b, c);
  };
  for (auto l : {Lineage::sd, Lineage::mg}) {
    for (auto m : {EstimatorMode::direct, EstimatorMode::shifted}) {
      const std::string name = std::string(to_string(l)) + "/" + std::string(to_string(m));
      const auto e = estimate(l, m, 5000);
      const double err = rel(e.value, target);
      o.check(err <= 5e-3, name + " within 5000");
      o.detail << name << "@" << e.iterations << "=" << err << " ";
      if (l == Lineage::sd) {
        const auto e5 = estimate(l, m, 500);
        const double err5 = rel(e5.value, target);
        o.check(err5 <= 5e-3, name + " within 500");
        o.detail << name << "@" << e5.iterations << "=" << err5 << " ";
      }
    }
  }
  return o;
}

// 5. Closed-form CD3D spectrum and the estimator on m = 9.
Outcome ac5() {
  Outcome o;
  const Cd3dSpec spec{9, 1.0};
  const auto sp = split(cd3d(spec));
  const auto ev = hermitian_eigenvalues(sp.h);
  const double c = std::cos(std::numbers::pi / 10.0);
  const double e_lo = std::abs(ev.front() - (6.0 - 6.0 * c));
  const double e_hi = std::abs(ev.back() - (6.0 + 6.0 * c));
  o.check(e_lo <= 1e-10 && e_hi <= 1e-10, "dense extremes");
  const double target = 6.0 * std::sin(std::numbers::pi / 10.0);
  EstimatorConfig est;
  est.eta = 300;
  est.stagnation_tol = 1e-300;
  const auto e = preadapt(sp, uniform_rhs(sp.dim(), 5), est);
  const double err = rel(e.value, target);
  o.check(err <= 0.02, "estimate");
  o.detail << "eig err " << e_lo << "/" << e_hi << " gamma_hat=" << e.value << " rel err " << err << " ("
           << e.iterations << " it)";
  // Informational only: the default stagnation stop ends the run early.
  const auto d = preadapt(sp, uniform_rhs(sp.dim(), 5), EstimatorConfig{});
  o.detail << "; default stop: rel err " << rel(d.value, target) << " (" << d.iterations << " it)";
  return o;
}

// 6. Dense spectral radius of T against the contraction bound.
Outcome ac6() {
  Outcome o;
  const Cd3dSpec spec{3, 1.0};
  const auto sp = split(cd3d(spec));
  const auto ev = hermitian_eigenvalues(sp.h);
  const double gs = std::sqrt(ev.front() * ev.back());
  for (double f : {0.5, 1.0, 2.0}) {
    const double g = f * gs;
    const double rho = iteration_matrix_dense(sp, g).spectral_radius;
    const double bound = contraction_bound(ev.front(), ev.back(), g);
    o.check(rho < 1.0, "rho < 1");
    o.check(rho <= bound + 1e-12, "rho <= bound");
    o.detail << "g=" << g << " rho=" << rho << " bound=" << bound << "; ";
  }
  const double b8 = contraction_bound(1.0, 2000.0, std::sqrt(2000.0));
  o.check(std::abs(b8 - 0.95626) <= 1e-5, "diag8 bound");
  o.detail << "diag8 bound " << b8;
  return o;
}

// 7. End-to-end PAHSS on CD3D m = 16.
Outcome ac7() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto a = cd3d({16, 1.0});
  const auto sp = split(a);
  const auto b = uniform_rhs(sp.dim(), 7);
  HssConfig cfg;
  cfg.tol = 1e-6;
  cfg.hermitian.tol = 1e-4;
  cfg.skew.tol = 1e-4;
  EstimatorConfig est;
  est.eta = 50;
  const auto r = pahss_solve(sp, b, est, cfg);
  const double secs = seconds_since(t0);
  const double res = recomputed_residual(cd3d({16, 1.0}), b, r.x);
  o.check(r.report.converged(), "converged");
  o.check(res <= 1e-6, "residual");
  o.check(secs < 60.0, "runtime");
  o.detail << "gamma=" << r.report.gamma << " outer=" << r.report.outer_iterations << " residual=" << res
           << " t=" << secs << "s";
  return o;
}

// 8. Outer iterations against the estimation budget.
Outcome ac8() {
  Outcome o;
  const auto sp = split(cd3d({16, 1.0}));
  auto median_outer = [&](std::size_t eta) {
    std::vector<std::size_t> v;
    for (std::uint64_t s = 1; s <= 5; ++s) {
      EstimatorConfig est;
      est.eta = eta;
      const auto r = pahss_solve(sp, uniform_rhs(sp.dim(), s), est, HssConfig{});
      if (!r.report.converged()) o.check(false, "eta=" + std::to_string(eta) + " converged");
      v.push_back(r.report.outer_iterations);
    }
    std::sort(v.begin(), v.end());
    return static_cast<long>(v[2]);
  };
  const long o5 = median_outer(5), o50 = median_outer(50), o100 = median_outer(100);
  o.check(o50 <= o5 + 2, "eta 50 vs 5");
  o.check(std::abs(o100 - o50) <= 2, "eta 100 vs 50");
  o.detail << "median outer eta5=" << o5 << " eta50=" << o50 << " eta100=" << o100;
  return o;
}

// 9. BB against CG at low and high precision.
Outcome ac9() {
  Outcome o;
  const auto h = diag_matrix(SpectrumSpec::logspace(1e-3, 1.0, 1000));
  const auto b = uniform_rhs(1000, 9);
  auto solve = [&](InnerMethod m, double tol) {
    InnerConfig c;
    c.method = m;
    c.tol = tol;
    return m == InnerMethod::cg ? cg_solve(h, b, nullptr, c).report : bb_solve(h, b, nullptr, c).report;
  };
  const auto cg1 = solve(InnerMethod::cg, 1e-1), bb1 = solve(InnerMethod::bb, 1e-1);
  const auto cg8 = solve(InnerMethod::cg, 1e-8), bb8 = solve(InnerMethod::bb, 1e-8);
  o.check(cg1.converged() && bb1.converged() && cg8.converged() && bb8.converged(), "converged");
  o.check(bb1.counters.matvecs <= 3 * cg1.counters.matvecs, "eps 1e-1");
  o.check(cg8.counters.matvecs <= bb8.counters.matvecs, "eps 1e-8");
  o.detail << "matvecs eps=1e-1 CG=" << cg1.counters.matvecs << " BB=" << bb1.counters.matvecs
           << "; eps=1e-8 CG=" << cg8.counters.matvecs << " BB=" << bb8.counters.matvecs;
  return o;
}

// 10. Per-iteration operation counts.
Outcome ac10() {
  Outcome o;
  const auto sp = split(cd3d({8, 1.0}));
  const auto b = uniform_rhs(sp.dim(), 10);
  const double g = 1.5;
  const ShiftedOperator<Complex> m1(sp.h, g);
  InnerConfig c;
  c.tol = 1e-8;
  c.method = InnerMethod::cg;
  const auto cg = cg_solve(m1, b, nullptr, c).report;
  c.method = InnerMethod::bb;
  const auto bb = bb_solve(m1, b, nullptr, c).report;
  c.method = InnerMethod::cgne;
  const auto cgne = cgne_solve(g, sp.s, b, nullptr, c).report;
  const auto od = orthodir_solve(sp.a, b, OrthodirConfig{}).report;

  // Route 1: direct ratio checks.
  auto exact = [&](const SolveReport& r, std::uint64_t d, std::uint64_t u, std::uint64_t m) {
    const std::uint64_t k = r.iterations;
    return r.converged() && k > 0 && r.counters.dots == d * k && r.counters.updates == u * k &&
           r.counters.matvecs == m * k;
  };
  o.check(exact(cg, 2, 3, 1), "CG (2,3,1)");
  o.check(exact(bb, 2, 2, 1), "BB (2,2,1)");
  o.check(exact(cgne, 2, 3, 2), "CGNE (2,3,2)");
  bool od_ok = od.converged() && od.per_iteration.size() == od.iterations;
  for (std::size_t k = 0; od_ok && k < od.per_iteration.size(); ++k) {
    const std::uint64_t i = od.direction_index[k];
    od_ok = od.per_iteration[k].dots == i + 2 && od.per_iteration[k].updates == 2 * i + 2 &&
            od.per_iteration[k].matvecs == 1;
  }
  o.check(od_ok, "ORTHODIR (i+2,2i+2,1)");

  // Route 2: the audit routine must agree.
  o.check(bench::audit_counters(cg, "cg").pass, "audit cg");
  o.check(bench::audit_counters(bb, "bb").pass, "audit bb");
  o.check(bench::audit_counters(cgne, "cgne").pass, "audit cgne");
  o.check(bench::audit_counters(od, "orthodir", od.direction_index).pass, "audit orthodir");
  o.detail << "iterations CG=" << cg.iterations << " BB=" << bb.iterations << " CGNE=" << cgne.iterations
           << " ORTHODIR=" << od.iterations;
  return o;
}

// 11. Solver race on CD3D m = 40.
Outcome ac11() {
  Outcome o;
  const auto sp = split(cd3d({40, 1.0}));
  const auto b = uniform_rhs(sp.dim(), 11);
  const auto hcg = hss_solve(sp, b, race_preset(InnerMethod::cg)).report;
  const auto hbb = hss_solve(sp, b, race_preset(InnerMethod::bb)).report;
  const auto od = orthodir_solve(sp.a, b, OrthodirConfig{}).report;
  const std::size_t in_cg = hcg.total_inner(), in_bb = hbb.total_inner();
  o.check(hcg.converged(), "HSS-CG converged");
  o.check(hbb.converged(), "HSS-BB converged");
  o.check(in_bb >= in_cg, "BB inner >= CG inner");
  o.check(od.converged() && od.iterations >= 40 && od.iterations <= 160, "ORTHODIR in [40,160]");
  o.check(in_cg > od.iterations && in_bb > od.iterations, "HSS inner > ORTHODIR");
  o.detail << "HSS-CG outer=" << hcg.outer_iterations << " inner=" << in_cg << "; HSS-BB outer="
           << hbb.outer_iterations << " inner=" << in_bb << "; ORTHODIR=" << od.iterations;
  return o;
}

// 12. Valley of the shift sweep on CD3D m = 9.
Outcome ac12() {
  Outcome o;
  const auto sp = split(cd3d({9, 1.0}));
  const auto b = uniform_rhs(sp.dim(), 12);
  double best_g = 0.0;
  std::size_t best = SIZE_MAX;
  for (int k = 0; k <= 12; ++k) {
    HssConfig cfg;
    cfg.gamma = 0.5 + 0.25 * k;
    const auto r = hss_solve(sp, b, cfg).report;
    if (!r.converged()) o.check(false, "converged at gamma=" + std::to_string(cfg.gamma));
    if (r.outer_iterations < best) {
      best = r.outer_iterations;
      best_g = cfg.gamma;
    }
  }
  const double dist = std::abs(best_g - 1.854);
  o.check(dist <= 0.75, "argmin");
  o.detail << "argmin gamma=" << best_g << " (" << best << " outer), distance " << dist;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> known;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--known-infeasible" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string id; std::getline(ss, id, ',');) known.insert(id);
    } else {
      std::cerr << "usage: acceptance [--known-infeasible AC1,AC4,...]\n";
      return 2;
    }
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4},   {"AC5", ac5},   {"AC6", ac6},
      {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10}, {"AC11", ac11}, {"AC12", ac12}};

  int passed = 0, unexpected = 0;
  for (const auto& [id, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    std::cout << id << (o.pass ? " PASS " : " FAIL ") << o.detail.str();
    if (!o.pass && known.count(id)) std::cout << " (known infeasible)";
    std::cout << std::endl;
    if (o.pass) ++passed;
    else if (!known.count(id)) ++unexpected;
  }
  std::cout << passed << "/" << criteria.size() << " criteria passed, " << unexpected << " unexpected failure(s)"
            << std::endl;
  return unexpected == 0 ? 0 : 1;
}
