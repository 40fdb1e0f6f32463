#pragma once

// Experiment drivers behind the hssbench tool. Each driver fills a run table
// and an aggregate summary; write_artifacts() turns them into files.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "../dense.hpp"
#include "../estimator.hpp"
#include "../graditer.hpp"
#include "../hss.hpp"
#include "../inner.hpp"
#include "../krylov.hpp"
#include "../matrix_market.hpp"
#include "../problems.hpp"
#include "../split.hpp"
#include "audit.hpp"
#include "config.hpp"
#include "json.hpp"
#include "table.hpp"

#ifndef HSSGRAD_VERSION
#define HSSGRAD_VERSION "unknown"
#endif

namespace hssgrad::bench {

enum class ExperimentKind { problem_gen, trace, estimate, sweep, pahss, race, bound_check, audit };

constexpr std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::problem_gen: return "problem-gen";
    case ExperimentKind::trace: return "trace";
    case ExperimentKind::estimate: return "estimate";
    case ExperimentKind::sweep: return "sweep";
    case ExperimentKind::pahss: return "pahss";
    case ExperimentKind::race: return "race";
    case ExperimentKind::bound_check: return "bound-check";
    case ExperimentKind::audit: return "audit";
  }
  return "?";
}

enum class ProblemKind { cd3d, diag8, logspace, random_hermitian, matrix_market };

constexpr std::string_view to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::cd3d: return "cd3d";
    case ProblemKind::diag8: return "diag8";
    case ProblemKind::logspace: return "logspace";
    case ProblemKind::random_hermitian: return "random-hermitian";
    case ProblemKind::matrix_market: return "matrix-market";
  }
  return "?";
}

inline ProblemKind parse_problem_kind(const std::string& s) {
  for (auto k : {ProblemKind::cd3d, ProblemKind::diag8, ProblemKind::logspace, ProblemKind::random_hermitian,
                 ProblemKind::matrix_market}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown problem kind '" + s + "'");
}

inline InnerMethod parse_inner(const std::string& s) {
  for (auto m : {InnerMethod::cg, InnerMethod::bb, InnerMethod::cgne, InnerMethod::direct}) {
    if (s == to_string(m)) return m;
  }
  throw ConfigError("unknown inner method '" + s + "'");
}

inline Steplength parse_steplength(const std::string& s) {
  for (auto k : {Steplength::sd, Steplength::mg, Steplength::bb, Steplength::bb2}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown steplength '" + s + "'");
}

inline Lineage parse_lineage(const std::string& s) {
  if (s == "sd") return Lineage::sd;
  if (s == "mg") return Lineage::mg;
  throw ConfigError("unknown lineage '" + s + "'");
}

inline EstimatorMode parse_mode(const std::string& s) {
  if (s == "direct") return EstimatorMode::direct;
  if (s == "shifted") return EstimatorMode::shifted;
  throw ConfigError("unknown estimator mode '" + s + "'");
}

struct ProblemSpec {
  ProblemKind kind = ProblemKind::cd3d;
  std::size_t m = 9;
  double theta = 1.0;
  Cd3dScaling scaling = Cd3dScaling::h2;
  std::size_t n = 1000;  ///< logspace / random-hermitian size
  double lo = 1e-3;
  double hi = 1.0;
  double density = 0.05;
  std::uint64_t seed = 1;  ///< random-hermitian generator seed
  std::filesystem::path path;

  std::string name() const {
    switch (kind) {
      case ProblemKind::cd3d: return "cd3d-m" + std::to_string(m);
      case ProblemKind::diag8: return "diag8";
      case ProblemKind::logspace: return "logspace-n" + std::to_string(n);
      case ProblemKind::random_hermitian: return "randherm-n" + std::to_string(n);
      case ProblemKind::matrix_market: return path.stem().string();
    }
    return "problem";
  }
};

inline void to_json(nlohmann::json& j, const ProblemSpec& p) {
  j = {{"kind", to_string(p.kind)}, {"name", p.name()}};
  switch (p.kind) {
    case ProblemKind::cd3d:
      j["m"] = p.m;
      j["theta"] = p.theta;
      j["scaling"] = p.scaling == Cd3dScaling::h2 ? "h2" : "none";
      break;
    case ProblemKind::logspace:
      j["n"] = p.n;
      j["lo"] = p.lo;
      j["hi"] = p.hi;
      break;
    case ProblemKind::random_hermitian:
      j["n"] = p.n;
      j["lo"] = p.lo;
      j["hi"] = p.hi;
      j["density"] = p.density;
      j["seed"] = p.seed;
      break;
    case ProblemKind::matrix_market: j["path"] = p.path.string(); break;
    case ProblemKind::diag8: break;
  }
}

struct Problem {
  std::string name;
  SplitOperator<Complex> split;
  /// Extreme eigenvalues of the Hermitian part when known.
  std::optional<SpectrumBounds> bounds;
};

inline Problem build_problem(const ProblemSpec& p) {
  Problem out;
  out.name = p.name();
  switch (p.kind) {
    case ProblemKind::cd3d: {
      const Cd3dSpec spec{p.m, p.theta, p.scaling};
      out.split = split(cd3d(spec));
      out.bounds = cd3d_hermitian_bounds(spec);
      break;
    }
    case ProblemKind::diag8:
      out.split = split(diag_matrix(diag8_spectrum()));
      out.bounds = diag8_spectrum().bounds();
      break;
    case ProblemKind::logspace: {
      const auto s = SpectrumSpec::logspace(p.lo, p.hi, p.n);
      out.split = split(diag_matrix(s));
      out.bounds = s.bounds();
      break;
    }
    case ProblemKind::random_hermitian: {
      RandomHermitianSpec spec;
      spec.n = p.n;
      spec.density = p.density;
      spec.seed = p.seed;
      spec.spectrum = SpectrumSpec::logspace(p.lo, p.hi, p.n);
      out.split = split(random_hermitian(spec));
      out.bounds = spec.spectrum->bounds();
      break;
    }
    case ProblemKind::matrix_market: {
      out.split = split(read_matrix_market(p.path));
      if (out.split.dim() <= kDirectSolveLimit) {
        const auto ev = hermitian_eigenvalues(out.split.h);
        if (!ev.empty() && ev.front() > 0.0) out.bounds = SpectrumBounds{ev.front(), ev.back()};
      }
      break;
    }
  }
  return out;
}

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::race;
  ProblemSpec problem;
  RhsSpec::Kind rhs = RhsSpec::Kind::complex_uniform;
  double rhs_lo = -10.0;
  double rhs_hi = 10.0;
  HssConfig hss;
  EstimatorConfig estimator;
  OrthodirConfig orthodir;
  std::size_t reps = 1;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "results";
  std::size_t workers = 1;

  // trace
  Steplength steplength = Steplength::sd;
  std::size_t trace_iters = 30;
  std::vector<std::size_t> q_iters{1, 2, 5, 10, 29};
  std::size_t q_points = 201;
  // sweep
  std::vector<std::size_t> sweep_m{9, 12, 15, 18, 21};
  double gamma_lo = 0.5;
  double gamma_hi = 3.5;
  double gamma_step = 0.25;
  // pahss
  std::vector<std::size_t> etas{5, 50, 100};
  // bound-check: explicit shifts, or multiples of gamma*
  std::vector<double> gammas;
  std::vector<double> gamma_factors{0.5, 1.0, 2.0};

  void validate() const {
    if (reps < 1) throw ConfigError("reps must be >= 1");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    hss.validate();
    estimator.validate();
    orthodir.validate();
    if (kind == ExperimentKind::sweep && !(gamma_step > 0.0 && gamma_hi >= gamma_lo && gamma_lo > 0.0)) {
      throw ConfigError("sweep: need 0 < gamma_lo <= gamma_hi and gamma_step > 0");
    }
    if (kind == ExperimentKind::trace && trace_iters < 2) throw ConfigError("trace: need at least 2 iterations");
    if (kind == ExperimentKind::pahss && etas.empty()) throw ConfigError("pahss: eta list is empty");
  }

  /// Seed of repetition r.
  std::uint64_t seed_of(std::size_t r) const { return seed + r; }

  ComplexVector make_b(std::size_t n, std::size_t rep) const {
    return make_rhs({rhs, rhs_lo, rhs_hi, seed_of(rep)}, n);
  }
};

inline void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  j = {{"experiment", to_string(c.kind)},
       {"problem", c.problem},
       {"rhs", {{"kind", c.rhs == RhsSpec::Kind::ones ? "ones" : "complex-uniform"}, {"lo", c.rhs_lo}, {"hi", c.rhs_hi}}},
       {"hss", c.hss},
       {"estimator", c.estimator},
       {"orthodir", c.orthodir},
       {"reps", c.reps},
       {"seed", c.seed},
       {"workers", c.workers}};
  switch (c.kind) {
    case ExperimentKind::trace:
      j["trace"] = {{"steplength", to_string(c.steplength)}, {"iterations", c.trace_iters}, {"q_iters", c.q_iters}};
      break;
    case ExperimentKind::sweep:
      j["sweep"] = {{"m", c.sweep_m}, {"gamma_lo", c.gamma_lo}, {"gamma_hi", c.gamma_hi}, {"gamma_step", c.gamma_step}};
      break;
    case ExperimentKind::pahss: j["pahss"] = {{"eta", c.etas}}; break;
    case ExperimentKind::bound_check: j["bound"] = {{"gammas", c.gammas}, {"factors", c.gamma_factors}}; break;
    default: break;
  }
}

/// Defaults that reproduce the corresponding desk-scale scenario.
inline ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::trace:
      c.problem.kind = ProblemKind::diag8;
      c.rhs = RhsSpec::Kind::ones;  // b = H ones, see run_trace
      break;
    case ExperimentKind::estimate: c.problem.m = 16; break;
    case ExperimentKind::sweep: break;
    case ExperimentKind::pahss:
      c.problem.m = 16;
      c.reps = 5;
      break;
    case ExperimentKind::race:
      c.problem.m = 40;
      c.hss = race_preset(InnerMethod::cg);
      break;
    case ExperimentKind::bound_check: c.problem.m = 3; break;
    case ExperimentKind::audit: c.problem.m = 9; break;
    case ExperimentKind::problem_gen: break;
  }
  return c;
}

/// Reads sections [problem], [rhs], [hss], [estimator], [orthodir], [run],
/// [trace], [sweep], [pahss], [bound] into `c`. Absent keys keep their values.
inline void apply_config(const KeyValueConfig& f, ExperimentConfig& c) {
  auto& p = c.problem;
  if (auto v = f.get<std::string>("problem", "kind")) p.kind = parse_problem_kind(*v);
  if (auto v = f.get<std::size_t>("problem", "m")) p.m = *v;
  if (auto v = f.get<double>("problem", "theta")) p.theta = *v;
  if (auto v = f.get<std::string>("problem", "scaling")) {
    if (*v != "h2" && *v != "none") throw ConfigError("problem.scaling must be h2 or none");
    p.scaling = *v == "h2" ? Cd3dScaling::h2 : Cd3dScaling::none;
  }
  if (auto v = f.get<std::size_t>("problem", "n")) p.n = *v;
  if (auto v = f.get<double>("problem", "lo")) p.lo = *v;
  if (auto v = f.get<double>("problem", "hi")) p.hi = *v;
  if (auto v = f.get<double>("problem", "density")) p.density = *v;
  if (auto v = f.get<std::uint64_t>("problem", "seed")) p.seed = *v;
  if (auto v = f.get<std::string>("problem", "path")) p.path = *v;

  if (auto v = f.get<std::string>("rhs", "kind")) {
    if (*v == "ones") c.rhs = RhsSpec::Kind::ones;
    else if (*v == "complex-uniform") c.rhs = RhsSpec::Kind::complex_uniform;
    else throw ConfigError("rhs.kind must be ones or complex-uniform");
  }
  if (auto v = f.get<double>("rhs", "lo")) c.rhs_lo = *v;
  if (auto v = f.get<double>("rhs", "hi")) c.rhs_hi = *v;

  if (auto v = f.get<double>("hss", "gamma")) c.hss.gamma = *v;
  if (auto v = f.get<double>("hss", "eps")) c.hss.tol = *v;
  if (auto v = f.get<double>("hss", "eps1")) c.hss.hermitian.tol = *v;
  if (auto v = f.get<double>("hss", "eps2")) c.hss.skew.tol = *v;
  if (auto v = f.get<std::string>("hss", "inner")) c.hss.hermitian.method = parse_inner(*v);
  if (auto v = f.get<std::size_t>("hss", "max_outer")) c.hss.max_outer = *v;
  if (auto v = f.get<bool>("hss", "warm_start")) c.hss.warm_start = *v;

  auto& e = c.estimator;
  if (auto v = f.get<std::string>("estimator", "lineage")) e.lineage = parse_lineage(*v);
  if (auto v = f.get<std::string>("estimator", "mode")) e.mode = parse_mode(*v);
  if (auto v = f.get<double>("estimator", "shift")) e.shift = *v;
  if (auto v = f.get<std::size_t>("estimator", "eta")) e.eta = *v;
  if (auto v = f.get<double>("estimator", "stagnation_tol")) e.stagnation_tol = *v;
  if (auto v = f.get<std::size_t>("estimator", "stagnation_window")) e.stagnation_window = *v;
  if (auto v = f.get<double>("estimator", "gamma_floor")) e.gamma_floor = *v;
  if (auto v = f.get<std::string>("estimator", "rhs")) {
    if (*v == "ones") e.rhs = EstimationRhs::ones;
    else if (*v == "system") e.rhs = EstimationRhs::system;
    else throw ConfigError("estimator.rhs must be ones or system");
  }

  if (auto v = f.get<std::size_t>("orthodir", "restart")) c.orthodir.restart = *v;
  if (auto v = f.get<std::size_t>("orthodir", "max_iters")) c.orthodir.max_iters = *v;
  if (auto v = f.get<double>("orthodir", "eps")) c.orthodir.tol = *v;

  if (auto v = f.get<std::size_t>("run", "reps")) c.reps = *v;
  if (auto v = f.get<std::uint64_t>("run", "seed")) c.seed = *v;
  if (auto v = f.get<std::string>("run", "out")) c.out_dir = *v;
  if (auto v = f.get<std::size_t>("run", "workers")) c.workers = *v;

  if (auto v = f.get<std::string>("trace", "steplength")) c.steplength = parse_steplength(*v);
  if (auto v = f.get<std::size_t>("trace", "iterations")) c.trace_iters = *v;
  if (auto v = f.get_list<std::size_t>("trace", "q_iters")) c.q_iters = *v;

  if (auto v = f.get_list<std::size_t>("sweep", "m")) c.sweep_m = *v;
  if (auto v = f.get<double>("sweep", "gamma_lo")) c.gamma_lo = *v;
  if (auto v = f.get<double>("sweep", "gamma_hi")) c.gamma_hi = *v;
  if (auto v = f.get<double>("sweep", "gamma_step")) c.gamma_step = *v;

  if (auto v = f.get_list<std::size_t>("pahss", "eta")) c.etas = *v;

  if (auto v = f.get_list<double>("bound", "gammas")) c.gammas = *v;
  if (auto v = f.get_list<double>("bound", "factors")) c.gamma_factors = *v;
}

/// Worker count from HSSGRAD_WORKERS, falling back to `fallback`.
inline std::size_t workers_from_env(std::size_t fallback = 1) {
  const char* v = std::getenv("HSSGRAD_WORKERS");
  if (v == nullptr || *v == '\0') return fallback;
  const auto n = KeyValueConfig::convert<std::size_t>(v, "HSSGRAD_WORKERS");
  if (n < 1) throw ConfigError("HSSGRAD_WORKERS must be >= 1");
  return n;
}

/// Runs f(0..n-1) on up to `workers` threads. Every index runs even if some
/// throw; the first exception (by index) is rethrown afterwards.
inline void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& f) {
  std::vector<std::exception_ptr> errors(n);
  auto guarded = [&](std::size_t i) {
    try {
      f(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t threads = std::min(workers, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) guarded(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) guarded(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct ExperimentResult {
  ExperimentKind kind{};
  Table runs;
  nlohmann::json aggregate = nlohmann::json::object();
  /// Extra artifacts: file name -> contents.
  std::vector<std::pair<std::string, std::string>> files;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

namespace detail {

inline std::int64_t as_int(std::size_t v) { return static_cast<std::int64_t>(v); }

inline std::vector<double> gamma_grid(double lo, double hi, double step) {
  std::vector<double> g;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) g.push_back(lo + step * static_cast<double>(i));
  return g;
}

inline std::string status_cell(SolveStatus s) { return std::string(to_string(s)); }

}  // namespace detail

// ---------------------------------------------------------------------------
// trace: gradient run on the Hermitian part with auxiliary quantities
// ---------------------------------------------------------------------------

inline ExperimentResult run_trace(const ExperimentConfig& c) {
  ExperimentResult out;
  out.kind = ExperimentKind::trace;
  const Problem p = build_problem(c.problem);
  const auto& h = p.split.h;
  // b = H ones puts equal weight on every eigencomponent of the solution.
  const ComplexVector b = c.rhs == RhsSpec::Kind::ones ? make_rhs_from_solution(h, ComplexVector(h.rows(), Complex(1)))
                                                       : c.make_b(h.rows(), 0);
  GradientStop stop;
  stop.tol = 1e-300;
  stop.max_iters = c.trace_iters;
  const auto res = run_gradient(c.steplength, h, b, ComplexVector(h.rows()), stop);
  const Lineage lineage = lineage_of(c.steplength);

  out.runs = Table({"n", "alpha", "grad_norm", "alpha_a", "gamma_sqrt", "alpha_y", "alpha_z", "discriminant"});
  const double nan = kNaN;
  for (std::size_t n = 0; n < res.trace.size(); ++n) {
    const auto& r = res.trace[n];
    if (n == 0) {
      out.runs.add({detail::as_int(n), r.alpha, r.grad_norm(), nan, nan, nan, nan, nan});
      continue;
    }
    const auto d = res.trace.derived(n, lineage);
    out.runs.add({detail::as_int(n), r.alpha, r.grad_norm(), d.alpha_a, d.gamma >= 0 ? std::sqrt(d.gamma) : nan,
                  d.alpha_y.value_or(nan), d.alpha_z.value_or(nan), d.discriminant});
  }

  // Q_n curves against the limit curve built from the extreme eigenvalues.
  std::ostringstream q;
  q << "n,alpha,q\n" << std::setprecision(std::numeric_limits<double>::max_digits10);
  const double l1 = p.bounds ? p.bounds->lambda_min : 1.0;
  const double ln = p.bounds ? p.bounds->lambda_max : 1.0;
  const double alpha_max = 1.05 / l1;
  for (std::size_t n : c.q_iters) {
    if (n == 0 || n >= res.trace.size()) continue;
    const auto d = res.trace.derived(n, lineage);
    for (std::size_t k = 0; k < c.q_points; ++k) {
      const double a = alpha_max * static_cast<double>(k) / static_cast<double>(c.q_points - 1);
      q << n << ',' << a << ',' << q_eval(d.gamma, d.alpha_ra, a) << '\n';
    }
  }
  if (p.bounds) {
    for (std::size_t k = 0; k < c.q_points; ++k) {
      const double a = alpha_max * static_cast<double>(k) / static_cast<double>(c.q_points - 1);
      q << "limit," << a << ',' << q_eval(l1 * ln, l1 + ln, a) << '\n';
    }
  }
  out.files.emplace_back("q_curves.csv", q.str());

  const std::size_t last = res.trace.size() - 1;
  const auto d = res.trace.derived(last, lineage);
  nlohmann::json agg = {{"iterations", res.trace.size()},
                        {"lineage", to_string(lineage)},
                        {"final",
                         {{"alpha_a", d.alpha_a},
                          {"gamma", d.gamma},
                          {"alpha_y", d.alpha_y.value_or(nan)},
                          {"alpha_z", d.alpha_z.value_or(nan)}}}};
  if (p.bounds) {
    agg["limits"] = {{"alpha_a", 1.0 / (l1 + ln)}, {"gamma", l1 * ln}, {"alpha_y", 1.0 / ln}, {"alpha_z", 1.0 / l1}};
    agg["gamma_star"] = std::sqrt(l1 * ln);
    agg["gamma_hat"] = d.gamma >= 0 ? std::sqrt(d.gamma) : nan;
  }
  out.aggregate = agg;
  return out;
}

// ---------------------------------------------------------------------------
// estimate: preadaptive shift estimation
// ---------------------------------------------------------------------------

inline ExperimentResult run_estimate(const ExperimentConfig& c) {
  ExperimentResult out;
  out.kind = ExperimentKind::estimate;
  const Problem p = build_problem(c.problem);
  const double gstar = p.bounds ? p.bounds->gamma_star() : kNaN;
  std::vector<GammaEstimate> est(c.reps);
  parallel_for(c.reps, c.workers, [&](std::size_t r) { est[r] = preadapt(p.split, c.make_b(p.split.dim(), r), c.estimator); });

  out.runs = Table({"rep", "seed", "lineage", "mode", "gamma_hat", "iterations", "reason", "gamma_star", "rel_err",
                    "matvecs", "seconds"});
  for (std::size_t r = 0; r < c.reps; ++r) {
    const auto& e = est[r];
    out.runs.add({detail::as_int(r), detail::as_int(c.seed_of(r)), std::string(to_string(c.estimator.lineage)),
                  std::string(to_string(c.estimator.mode)), e.value, detail::as_int(e.iterations),
                  std::string(to_string(e.reason)), gstar, std::abs(e.value - gstar) / gstar,
                  static_cast<std::int64_t>(e.report.counters.matvecs), e.report.seconds});
  }
  std::ostringstream hist;
  write_estimate_csv(hist, est.front());
  out.files.emplace_back("estimate_history.csv", hist.str());
  out.aggregate = {{"gamma_star", gstar},
                   {"summary", summarize(out.runs, {"lineage", "mode"}, {"gamma_hat", "iterations", "rel_err", "seconds"})}};
  return out;
}

// ---------------------------------------------------------------------------
// sweep: outer iterations over a shift grid, per grid size
// ---------------------------------------------------------------------------

inline ExperimentResult run_sweep(const ExperimentConfig& c) {
  ExperimentResult out;
  out.kind = ExperimentKind::sweep;
  const auto grid = detail::gamma_grid(c.gamma_lo, c.gamma_hi, c.gamma_step);
  std::vector<ProblemSpec> specs;
  if (c.problem.kind == ProblemKind::cd3d) {
    for (std::size_t m : c.sweep_m) {
      ProblemSpec s = c.problem;
      s.m = m;
      specs.push_back(s);
    }
  } else {
    specs.push_back(c.problem);
  }

  struct Job {
    std::size_t problem, gamma, rep;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < specs.size(); ++i)
    for (std::size_t g = 0; g < grid.size(); ++g)
      for (std::size_t r = 0; r < c.reps; ++r) jobs.push_back({i, g, r});

  std::vector<Problem> problems;
  for (const auto& s : specs) problems.push_back(build_problem(s));
  std::vector<OuterReport> reports(jobs.size());
  parallel_for(jobs.size(), c.workers, [&](std::size_t j) {
    const auto& job = jobs[j];
    const auto& p = problems[job.problem];
    HssConfig h = c.hss;
    h.gamma = grid[job.gamma];
    reports[j] = hss_solve(p.split, c.make_b(p.split.dim(), job.rep), h).report;
  });

  out.runs = Table({"problem", "m", "gamma", "rep", "seed", "outer", "inner_hermitian", "inner_skew", "matvecs",
                    "status", "final_residual", "seconds"});
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& r = reports[j];
    out.runs.add({problems[jobs[j].problem].name, detail::as_int(specs[jobs[j].problem].m), grid[jobs[j].gamma],
                  detail::as_int(jobs[j].rep), detail::as_int(c.seed_of(jobs[j].rep)),
                  detail::as_int(r.outer_iterations), detail::as_int(r.total_inner_hermitian()),
                  detail::as_int(r.total_inner_skew()), static_cast<std::int64_t>(r.counters.matvecs),
                  detail::status_cell(r.status), r.final_rel_residual, r.seconds});
    if (!r.converged()) {
      out.failures.push_back(problems[jobs[j].problem].name + " gamma=" + std::to_string(grid[jobs[j].gamma]) + ": " +
                             std::string(to_string(r.status)));
    }
  }

  nlohmann::json valleys = nlohmann::json::array();
  const auto summary = summarize(out.runs, {"problem", "gamma"}, {"outer", "matvecs", "seconds"});
  for (std::size_t i = 0; i < problems.size(); ++i) {
    double best_gamma = kNaN, best = std::numeric_limits<double>::infinity();
    for (const auto& g : summary) {
      if (g["problem"] != problems[i].name) continue;
      const double med = g["median"]["outer"];
      if (med < best) {
        best = med;
        best_gamma = g["gamma"];
      }
    }
    nlohmann::json v = {{"problem", problems[i].name}, {"argmin_gamma", best_gamma}, {"min_outer", best}};
    if (problems[i].bounds) {
      v["gamma_star"] = problems[i].bounds->gamma_star();
      v["distance"] = std::abs(best_gamma - problems[i].bounds->gamma_star());
    }
    valleys.push_back(v);
  }
  out.aggregate = {{"valleys", valleys}, {"summary", summary}};
  return out;
}

// ---------------------------------------------------------------------------
// pahss: estimation budget against outer iterations
// ---------------------------------------------------------------------------

inline ExperimentResult run_pahss(const ExperimentConfig& c) {
  ExperimentResult out;
  out.kind = ExperimentKind::pahss;
  const Problem p = build_problem(c.problem);
  struct Job {
    std::size_t eta, rep;
  };
  std::vector<Job> jobs;
  for (std::size_t e : c.etas)
    for (std::size_t r = 0; r < c.reps; ++r) jobs.push_back({e, r});
  std::vector<OuterReport> reports(jobs.size());
  std::vector<std::string> errors(jobs.size());
  parallel_for(jobs.size(), c.workers, [&](std::size_t j) {
    EstimatorConfig est = c.estimator;
    est.eta = jobs[j].eta;
    try {
      reports[j] = pahss_solve(p.split, c.make_b(p.split.dim(), jobs[j].rep), est, c.hss).report;
    } catch (const EstimationFailed& e) {
      errors[j] = e.what();
    }
  });

  out.runs = Table({"eta", "rep", "seed", "gamma_hat", "estimate_iterations", "outer", "inner_hermitian",
                    "inner_skew", "matvecs", "matvecs_estimation", "status", "final_residual", "seconds",
                    "seconds_estimate"});
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& r = reports[j];
    if (!errors[j].empty()) {
      out.runs.add({detail::as_int(jobs[j].eta), detail::as_int(jobs[j].rep), detail::as_int(c.seed_of(jobs[j].rep)),
                    kNaN, std::int64_t{0}, std::int64_t{0}, std::int64_t{0}, std::int64_t{0}, std::int64_t{0},
                    std::int64_t{0}, std::string("estimation-failed"), kNaN, 0.0, 0.0});
      out.failures.push_back("eta=" + std::to_string(jobs[j].eta) + ": " + errors[j]);
      continue;
    }
    out.runs.add({detail::as_int(jobs[j].eta), detail::as_int(jobs[j].rep), detail::as_int(c.seed_of(jobs[j].rep)),
                  r.gamma, detail::as_int(r.estimate ? r.estimate->iterations : 0),
                  detail::as_int(r.outer_iterations), detail::as_int(r.total_inner_hermitian()),
                  detail::as_int(r.total_inner_skew()), static_cast<std::int64_t>(r.counters.matvecs),
                  static_cast<std::int64_t>(r.estimation_counts.matvecs), detail::status_cell(r.status),
                  r.final_rel_residual, r.seconds, r.seconds_estimate});
    if (!r.converged()) out.failures.push_back("eta=" + std::to_string(jobs[j].eta) + ": " + std::string(to_string(r.status)));
  }
  out.aggregate = {{"gamma_star", p.bounds ? p.bounds->gamma_star() : kNaN},
                   {"summary", summarize(out.runs, {"eta"},
                                         {"gamma_hat", "outer", "inner_hermitian", "inner_skew", "matvecs",
                                          "seconds", "seconds_estimate"})}};
  return out;
}

// ---------------------------------------------------------------------------
// race: HSS-CG, HSS-BB and ORTHODIR on the same systems
// ---------------------------------------------------------------------------

inline ExperimentResult run_race(const ExperimentConfig& c) {
  ExperimentResult out;
  out.kind = ExperimentKind::race;
  const Problem p = build_problem(c.problem);
  std::vector<std::string> methods{"hss-cg", "hss-bb", "orthodir"};
  if (c.orthodir.restart > 0) methods.push_back("orthodir(" + std::to_string(c.orthodir.restart) + ")");

  struct Row {
    std::size_t iterations = 0, inner_h = 0, inner_s = 0;
    OpCounts counts;
    SolveStatus status = SolveStatus::max_iters;
    double residual = kNaN, seconds = 0.0;
    std::string history;
  };
  struct Job {
    std::size_t method, rep;
  };
  std::vector<Job> jobs;
  for (std::size_t m = 0; m < methods.size(); ++m)
    for (std::size_t r = 0; r < c.reps; ++r) jobs.push_back({m, r});
  std::vector<Row> rows(jobs.size());

  parallel_for(jobs.size(), c.workers, [&](std::size_t j) {
    const std::string& name = methods[jobs[j].method];
    const ComplexVector b = c.make_b(p.split.dim(), jobs[j].rep);
    Row& row = rows[j];
    std::ostringstream hist;
    if (name.starts_with("hss-")) {
      HssConfig h = c.hss;
      h.hermitian.method = name == "hss-cg" ? InnerMethod::cg : InnerMethod::bb;
      const auto r = hss_solve(p.split, b, h).report;
      row = {r.outer_iterations, r.total_inner_hermitian(), r.total_inner_skew(), r.counters, r.status,
             r.final_rel_residual, r.seconds, {}};
      write_outer_csv(hist, r);
    } else {
      OrthodirConfig o = c.orthodir;
      o.tol = c.hss.tol;
      if (name == "orthodir") o.restart = 0;
      const auto res = orthodir_solve(p.split.a, b, o);
      const auto& r = res.report;
      row = {r.iterations, 0, 0, r.total(), r.status, true_relative_residual(p.split.a, b, res.x), r.seconds, {}};
      write_residual_csv(hist, r);
    }
    row.history = hist.str();
  });

  out.runs = Table({"method", "rep", "seed", "iterations", "inner_hermitian", "inner_skew", "inner_total", "dots",
                    "updates", "matvecs", "status", "final_residual", "seconds"});
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& r = rows[j];
    const auto& name = methods[jobs[j].method];
    out.runs.add({name, detail::as_int(jobs[j].rep), detail::as_int(c.seed_of(jobs[j].rep)),
                  detail::as_int(r.iterations), detail::as_int(r.inner_h), detail::as_int(r.inner_s),
                  detail::as_int(r.inner_h + r.inner_s), static_cast<std::int64_t>(r.counts.dots),
                  static_cast<std::int64_t>(r.counts.updates), static_cast<std::int64_t>(r.counts.matvecs),
                  detail::status_cell(r.status), r.residual, r.seconds});
    if (r.status != SolveStatus::converged) out.failures.push_back(name + ": " + std::string(to_string(r.status)));
    if (jobs[j].rep == 0) out.files.emplace_back("history_" + name + ".csv", r.history);
  }
  out.aggregate = {{"summary", summarize(out.runs, {"method"},
                                         {"iterations", "inner_hermitian", "inner_skew", "inner_total", "matvecs",
                                          "seconds"})}};
  return out;
}

// ---------------------------------------------------------------------------
// bound-check: dense iteration matrix against the contraction bound
// ---------------------------------------------------------------------------

inline ExperimentResult run_bound_check(const ExperimentConfig& c) {
  ExperimentResult out;
  out.kind = ExperimentKind::bound_check;
  const Problem p = build_problem(c.problem);
  if (!p.bounds) throw ConfigError("bound-check: spectrum of the Hermitian part is unknown");
  std::vector<double> gammas = c.gammas;
  if (gammas.empty())
    for (double f : c.gamma_factors) gammas.push_back(f * p.bounds->gamma_star());

  out.runs = Table({"gamma", "spectral_radius", "bound", "rho_lt_1", "rho_le_bound"});
  for (double g : gammas) {
    const auto t = iteration_matrix_dense(p.split, g);
    const double bound = contraction_bound(p.bounds->lambda_min, p.bounds->lambda_max, g);
    const bool lt1 = t.spectral_radius < 1.0;
    const bool le = t.spectral_radius <= bound + 1e-12;
    out.runs.add({g, t.spectral_radius, bound, std::int64_t{lt1}, std::int64_t{le}});
    if (!lt1 || !le) out.failures.push_back("gamma=" + std::to_string(g) + ": bound violated");
  }
  out.aggregate = {{"gamma_star", p.bounds->gamma_star()},
                   {"lambda_min", p.bounds->lambda_min},
                   {"lambda_max", p.bounds->lambda_max},
                   {"checks", out.runs.to_json()}};
  return out;
}

// ---------------------------------------------------------------------------
// audit: per-iteration operation counts for every counted solver
// ---------------------------------------------------------------------------

inline ExperimentResult run_audit(const ExperimentConfig& c) {
  ExperimentResult out;
  out.kind = ExperimentKind::audit;
  const Problem p = build_problem(c.problem);
  const ComplexVector b = c.make_b(p.split.dim(), 0);
  const double g = c.hss.gamma;
  const ShiftedOperator<Complex> herm(p.split.h, g);

  InnerConfig inner;
  inner.tol = 1e-8;
  std::vector<std::pair<std::string, SolveReport>> reports;
  inner.method = InnerMethod::cg;
  reports.emplace_back("cg", cg_solve(herm, b, nullptr, inner).report);
  inner.method = InnerMethod::bb;
  reports.emplace_back("bb", bb_solve(herm, b, nullptr, inner).report);
  inner.method = InnerMethod::cgne;
  reports.emplace_back("cgne", cgne_solve(g, p.split.s, b, nullptr, inner).report);
  const auto od = orthodir_solve(p.split.a, b, c.orthodir).report;

  out.runs = Table({"method", "iterations", "dots", "updates", "matvecs", "status", "pass", "detail"});
  auto add = [&](const std::string& name, const SolveReport& r, const AuditResult& a) {
    std::string msg;
    for (const auto& m : a.mismatches) msg += (msg.empty() ? "" : "; ") + m;
    out.runs.add({name, detail::as_int(r.iterations), static_cast<std::int64_t>(r.counters.dots),
                  static_cast<std::int64_t>(r.counters.updates), static_cast<std::int64_t>(r.counters.matvecs),
                  detail::status_cell(r.status), std::int64_t{a.pass}, msg});
    if (!a.pass) out.failures.push_back(name + ": " + msg);
  };
  for (const auto& [name, r] : reports) add(name, r, audit_counters(r, name));
  add(od.method, od, audit_counters(od, od.method, od.direction_index));

  nlohmann::json per_iter = nlohmann::json::array();
  for (std::size_t k = 0; k < od.per_iteration.size(); ++k) {
    per_iter.push_back({{"iteration", k}, {"i", od.direction_index[k]}, {"counts", od.per_iteration[k]}});
  }
  out.aggregate = {{"gamma", g}, {"audits", out.runs.to_json()}, {"orthodir_per_iteration", per_iter}};
  return out;
}

// ---------------------------------------------------------------------------
// problem gen: matrix and right-hand side as Matrix Market files
// ---------------------------------------------------------------------------

inline ExperimentResult run_problem_gen(const ExperimentConfig& c) {
  ExperimentResult out;
  out.kind = ExperimentKind::problem_gen;
  const Problem p = build_problem(c.problem);
  std::ostringstream a, b;
  write_matrix_market(a, p.split.a);
  write_vector(b, c.make_b(p.split.dim(), 0));
  out.files.emplace_back(p.name + ".mtx", a.str());
  out.files.emplace_back(p.name + "_rhs.mtx", b.str());
  out.runs = Table({"name", "n", "nnz"});
  out.runs.add({p.name, detail::as_int(p.split.dim()), detail::as_int(p.split.a.nnz())});
  out.aggregate = {{"name", p.name}, {"n", p.split.dim()}, {"nnz", p.split.a.nnz()}};
  if (p.bounds) {
    out.aggregate["lambda_min"] = p.bounds->lambda_min;
    out.aggregate["lambda_max"] = p.bounds->lambda_max;
    out.aggregate["gamma_star"] = p.bounds->gamma_star();
  }
  nlohmann::json sidecar = out.aggregate;
  sidecar["problem"] = c.problem;
  sidecar["rhs"] = {{"kind", c.rhs == RhsSpec::Kind::ones ? "ones" : "complex-uniform"},
                    {"lo", c.rhs_lo},
                    {"hi", c.rhs_hi},
                    {"seed", c.seed_of(0)}};
  out.files.emplace_back(p.name + ".json", sidecar.dump(2) + "\n");
  return out;
}

inline ExperimentResult run(const ExperimentConfig& c) {
  c.validate();
  switch (c.kind) {
    case ExperimentKind::problem_gen: return run_problem_gen(c);
    case ExperimentKind::trace: return run_trace(c);
    case ExperimentKind::estimate: return run_estimate(c);
    case ExperimentKind::sweep: return run_sweep(c);
    case ExperimentKind::pahss: return run_pahss(c);
    case ExperimentKind::race: return run_race(c);
    case ExperimentKind::bound_check: return run_bound_check(c);
    case ExperimentKind::audit: return run_audit(c);
  }
  throw ConfigError("unknown experiment");
}

/// Writes runs.csv, aggregate.json, manifest.json and the extra files into
/// c.out_dir. Returns the written paths.
inline std::vector<std::filesystem::path> write_artifacts(const ExperimentConfig& c, const ExperimentResult& r) {
  namespace fs = std::filesystem;
  fs::create_directories(c.out_dir);
  std::vector<fs::path> written;
  auto put = [&](const std::string& name, const std::string& body) {
    const fs::path path = c.out_dir / name;
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << body;
    written.push_back(path);
  };
  std::ostringstream csv;
  r.runs.write_csv(csv);
  put("runs.csv", csv.str());

  nlohmann::json agg = r.aggregate;
  agg["status"] = r.ok() ? "ok" : "failed";
  if (!r.ok()) agg["failures"] = r.failures;
  put("aggregate.json", agg.dump(2) + "\n");
  for (const auto& [name, body] : r.files) put(name, body);

  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < c.reps; ++i) seeds.push_back(c.seed_of(i));
  nlohmann::json files = nlohmann::json::array();
  for (const auto& p : written) files.push_back(p.filename().string());
  const nlohmann::json manifest = {{"tool", "hssbench"},
                                   {"version", HSSGRAD_VERSION},
                                   {"experiment", to_string(r.kind)},
                                   {"config", c},
                                   {"seeds", seeds},
                                   {"status", r.ok() ? "ok" : "failed"},
                                   {"files", files}};
  put("manifest.json", manifest.dump(2) + "\n");
  return written;
}

}  // namespace hssgrad::bench
