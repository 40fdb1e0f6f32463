// hssbench: experiment driver for the HSS solver library.

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "hssgrad/bench/experiments.hpp"

namespace hb = hssgrad::bench;

namespace {

struct Flags {
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::optional<std::size_t> workers;

  std::optional<std::string> problem;
  std::optional<std::size_t> m;
  std::optional<double> theta;
  std::optional<std::string> scaling;
  std::optional<std::size_t> n;
  std::optional<double> lo, hi, density;
  std::optional<std::uint64_t> problem_seed;
  std::optional<std::string> matrix;
  std::optional<std::string> rhs;

  std::optional<double> gamma, gamma_floor, eps, eps1, eps2;
  std::optional<std::size_t> eta, restart, max_outer;
  std::optional<std::string> inner;
  std::optional<std::string> lineage, mode;
  std::optional<double> shift, stagnation_tol;

  std::optional<std::string> steplength;
  std::optional<std::size_t> iterations;
  std::optional<std::vector<std::size_t>> sweep_m, etas;
  std::optional<double> gamma_lo, gamma_hi, gamma_step;
  std::optional<std::vector<double>> gammas;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "Key-value config file; flags override it")->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--seed", f.seed, "Base seed; repetition r uses seed + r");
  cmd->add_option("--reps", f.reps, "Repetitions")->check(CLI::PositiveNumber);
  cmd->add_option("--workers", f.workers, "Worker threads (default: $HSSGRAD_WORKERS or 1)")
      ->check(CLI::PositiveNumber);

  cmd->add_option("--problem", f.problem, "cd3d | diag8 | logspace | random-hermitian | matrix-market");
  cmd->add_option("--m", f.m, "CD3D interior grid points per axis");
  cmd->add_option("--theta", f.theta, "CD3D convection coefficient");
  cmd->add_option("--scaling", f.scaling, "CD3D assembly scaling: h2 | none");
  cmd->add_option("--n", f.n, "Dimension of logspace / random-hermitian problems");
  cmd->add_option("--lo", f.lo, "Smallest prescribed eigenvalue");
  cmd->add_option("--hi", f.hi, "Largest prescribed eigenvalue");
  cmd->add_option("--density", f.density, "Random-hermitian rotation density");
  cmd->add_option("--problem-seed", f.problem_seed, "Random-hermitian generator seed");
  cmd->add_option("--matrix", f.matrix, "Matrix Market file")->check(CLI::ExistingFile);
  cmd->add_option("--rhs", f.rhs, "Right-hand side: ones | complex-uniform");

  cmd->add_option("--gamma", f.gamma, "HSS shift");
  cmd->add_option("--gamma-floor", f.gamma_floor, "Lower bound applied to estimated shifts (0 disables)");
  cmd->add_option("--eta", f.eta, "Gradient iterations for shift estimation");
  cmd->add_option("--eps", f.eps, "Outer relative residual tolerance");
  cmd->add_option("--eps1", f.eps1, "Hermitian half-step tolerance");
  cmd->add_option("--eps2", f.eps2, "Skew half-step tolerance");
  cmd->add_option("--inner", f.inner, "Hermitian half-step solver")->check(CLI::IsMember({"cg", "bb", "direct"}));
  cmd->add_option("--max-outer", f.max_outer, "Outer iteration cap");
  cmd->add_option("--restart", f.restart, "ORTHODIR restart length (0: full)");
  cmd->add_option("--lineage", f.lineage, "Estimator lineage")->check(CLI::IsMember({"sd", "mg"}));
  cmd->add_option("--mode", f.mode, "Estimator mode")->check(CLI::IsMember({"direct", "shifted"}));
  cmd->add_option("--shift", f.shift, "Shift of the shifted estimator");
  cmd->add_option("--stagnation-tol", f.stagnation_tol, "Estimator stagnation tolerance");
}

void apply_flags(const Flags& f, hb::ExperimentConfig& c) {
  if (f.out) c.out_dir = *f.out;
  if (f.seed) c.seed = *f.seed;
  if (f.reps) c.reps = *f.reps;
  if (f.workers) c.workers = *f.workers;

  auto& p = c.problem;
  if (f.problem) p.kind = hb::parse_problem_kind(*f.problem);
  if (f.m) p.m = *f.m;
  if (f.theta) p.theta = *f.theta;
  if (f.scaling) {
    if (*f.scaling != "h2" && *f.scaling != "none") throw hb::ConfigError("--scaling must be h2 or none");
    p.scaling = *f.scaling == "h2" ? hssgrad::Cd3dScaling::h2 : hssgrad::Cd3dScaling::none;
  }
  if (f.n) p.n = *f.n;
  if (f.lo) p.lo = *f.lo;
  if (f.hi) p.hi = *f.hi;
  if (f.density) p.density = *f.density;
  if (f.problem_seed) p.seed = *f.problem_seed;
  if (f.matrix) {
    p.kind = hb::ProblemKind::matrix_market;
    p.path = *f.matrix;
  }
  if (f.rhs) {
    if (*f.rhs == "ones") c.rhs = hssgrad::RhsSpec::Kind::ones;
    else if (*f.rhs == "complex-uniform") c.rhs = hssgrad::RhsSpec::Kind::complex_uniform;
    else throw hb::ConfigError("--rhs must be ones or complex-uniform");
  }

  if (f.gamma) c.hss.gamma = *f.gamma;
  if (f.gamma_floor) c.estimator.gamma_floor = *f.gamma_floor;
  if (f.eta) c.estimator.eta = *f.eta;
  if (f.eps) c.hss.tol = *f.eps;
  if (f.eps1) c.hss.hermitian.tol = *f.eps1;
  if (f.eps2) c.hss.skew.tol = *f.eps2;
  if (f.inner) c.hss.hermitian.method = hb::parse_inner(*f.inner);
  if (f.max_outer) c.hss.max_outer = *f.max_outer;
  if (f.restart) c.orthodir.restart = *f.restart;
  if (f.lineage) c.estimator.lineage = hb::parse_lineage(*f.lineage);
  if (f.mode) c.estimator.mode = hb::parse_mode(*f.mode);
  if (f.shift) c.estimator.shift = *f.shift;
  if (f.stagnation_tol) c.estimator.stagnation_tol = *f.stagnation_tol;

  if (f.steplength) c.steplength = hb::parse_steplength(*f.steplength);
  if (f.iterations) c.trace_iters = *f.iterations;
  if (f.sweep_m) c.sweep_m = *f.sweep_m;
  if (f.gamma_lo) c.gamma_lo = *f.gamma_lo;
  if (f.gamma_hi) c.gamma_hi = *f.gamma_hi;
  if (f.gamma_step) c.gamma_step = *f.gamma_step;
  if (f.etas) c.etas = *f.etas;
  if (f.gammas) c.gammas = *f.gammas;
}

int execute(hb::ExperimentKind kind, const Flags& f) {
  hb::ExperimentConfig c = hb::default_config(kind);
  c.workers = hb::workers_from_env(c.workers);
  if (f.config) hb::apply_config(hb::KeyValueConfig::load(*f.config), c);
  apply_flags(f, c);

  hb::ExperimentResult r;
  try {
    r = hb::run(c);
  } catch (const hb::ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    // Keep a marker so that a failed run is visible in the output directory.
    r.kind = kind;
    r.failures.push_back(e.what());
    r.aggregate = {{"error", e.what()}};
  }
  const auto files = hb::write_artifacts(c, r);
  for (const auto& p : files) std::cout << p.string() << '\n';
  if (!r.ok()) {
    for (const auto& msg : r.failures) std::cerr << "hssbench: " << to_string(kind) << ": " << msg << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmarks for HSS with estimated shifts"};
  app.require_subcommand(1);
  app.set_version_flag("--version", HSSGRAD_VERSION);
  Flags f;
  std::optional<hb::ExperimentKind> chosen;

  auto* problem = app.add_subcommand("problem", "Problem generators");
  problem->require_subcommand(1);
  auto* gen = problem->add_subcommand("gen", "Write A and b as Matrix Market files plus a JSON sidecar");
  add_common(gen, f);
  gen->callback([&] { chosen = hb::ExperimentKind::problem_gen; });

  auto* trace = app.add_subcommand("trace", "Gradient run with auxiliary steplengths and Q_n curves");
  add_common(trace, f);
  trace->add_option("--method", f.steplength, "sd | mg | bb | bb2")->check(CLI::IsMember({"sd", "mg", "bb", "bb2"}));
  trace->add_option("--iters", f.iterations, "Gradient iterations");
  trace->callback([&] { chosen = hb::ExperimentKind::trace; });

  auto* estimate = app.add_subcommand("estimate", "Shift estimation from a short gradient run");
  add_common(estimate, f);
  estimate->callback([&] { chosen = hb::ExperimentKind::estimate; });

  auto* sweep = app.add_subcommand("sweep", "Outer iterations over a shift grid");
  add_common(sweep, f);
  sweep->add_option("--sizes", f.sweep_m, "CD3D grid sizes")->delimiter(',');
  sweep->add_option("--gamma-lo", f.gamma_lo, "First shift");
  sweep->add_option("--gamma-hi", f.gamma_hi, "Last shift");
  sweep->add_option("--gamma-step", f.gamma_step, "Shift step");
  sweep->callback([&] { chosen = hb::ExperimentKind::sweep; });

  auto* pahss = app.add_subcommand("pahss", "Estimation budget against outer iterations");
  add_common(pahss, f);
  pahss->add_option("--etas", f.etas, "Estimation budgets")->delimiter(',');
  pahss->callback([&] { chosen = hb::ExperimentKind::pahss; });

  auto* race = app.add_subcommand("race", "HSS-CG, HSS-BB and ORTHODIR on the same systems");
  add_common(race, f);
  race->callback([&] { chosen = hb::ExperimentKind::race; });

  auto* bound = app.add_subcommand("bound-check", "Spectral radius of the iteration matrix against the bound");
  add_common(bound, f);
  bound->add_option("--gammas", f.gammas, "Shifts (default: 0.5, 1, 2 times gamma*)")->delimiter(',');
  bound->callback([&] { chosen = hb::ExperimentKind::bound_check; });

  auto* audit = app.add_subcommand("audit", "Per-iteration operation counts against the cost table");
  add_common(audit, f);
  audit->callback([&] { chosen = hb::ExperimentKind::audit; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    return execute(*chosen, f);
  } catch (const std::exception& e) {
    std::cerr << "hssbench: " << e.what() << '\n';
    return 2;
  }
}
