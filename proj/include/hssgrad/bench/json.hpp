#pragma once

// JSON views of solver reports and configurations.

#include <json.hpp>
#include <ostream>
#include <string>

#include "../estimator.hpp"
#include "../hss.hpp"
#include "../krylov.hpp"
#include "../report.hpp"

namespace hssgrad {

inline void to_json(nlohmann::json& j, const OpCounts& c) {
  j = {{"dots", c.dots}, {"updates", c.updates}, {"matvecs", c.matvecs}};
}

inline void to_json(nlohmann::json& j, const SolveReport& r) {
  j = {{"method", r.method},
       {"iterations", r.iterations},
       {"final_rel_residual", r.final_rel_residual},
       {"status", to_string(r.status)},
       {"counters", r.counters},
       {"overhead", r.overhead},
       {"seconds", r.seconds},
       {"residual_history", r.residual_history}};
  if (!r.per_iteration.empty()) j["per_iteration"] = r.per_iteration;
}

inline void to_json(nlohmann::json& j, const OrthodirReport& r) {
  to_json(j, static_cast<const SolveReport&>(r));
  j["direction_index"] = r.direction_index;
  j["cycles"] = r.cycles;
  j["max_directions"] = r.max_directions;
  j["storage_scalars"] = r.storage_scalars;
}

inline void to_json(nlohmann::json& j, const InnerConfig& c) {
  j = {{"method", to_string(c.method)},
       {"tol", c.tol},
       {"reference", c.reference == ResidualReference::initial ? "initial" : "rhs"},
       {"max_iters", c.max_iters},
       {"warm_start", c.warm_start}};
}

inline void to_json(nlohmann::json& j, const HssConfig& c) {
  j = {{"gamma", c.gamma},         {"tol", c.tol},   {"max_outer", c.max_outer},
       {"hermitian", c.hermitian}, {"skew", c.skew}, {"warm_start", c.warm_start}};
}

inline void to_json(nlohmann::json& j, const EstimatorConfig& c) {
  j = {{"lineage", to_string(c.lineage)},
       {"mode", to_string(c.mode)},
       {"shift", c.shift},
       {"eta", c.eta},
       {"stagnation_tol", c.stagnation_tol},
       {"stagnation_window", c.stagnation_window},
       {"gamma_floor", c.gamma_floor},
       {"vanish_tol", c.vanish_tol},
       {"rhs", c.rhs == EstimationRhs::ones ? "ones" : "system"}};
}

inline void to_json(nlohmann::json& j, const OrthodirConfig& c) {
  j = {{"tol", c.tol}, {"restart", c.restart}, {"max_iters", c.max_iters}, {"warm_start", c.warm_start}};
}

inline void to_json(nlohmann::json& j, const GammaEstimate& e) {
  j = {{"value", e.value},
       {"iterations", e.iterations},
       {"reason", to_string(e.reason)},
       {"counters", e.report.counters},
       {"seconds", e.report.seconds}};
}

inline void to_json(nlohmann::json& j, const OuterReport& r) {
  j = {{"gamma", r.gamma},
       {"outer_iterations", r.outer_iterations},
       {"status", to_string(r.status)},
       {"final_rel_residual", r.final_rel_residual},
       {"inner_hermitian", r.inner_hermitian},
       {"inner_skew", r.inner_skew},
       {"counters", r.counters},
       {"hermitian_counts", r.hermitian_counts},
       {"skew_counts", r.skew_counts},
       {"estimation_counts", r.estimation_counts},
       {"seconds", r.seconds},
       {"seconds_hermitian", r.seconds_hermitian},
       {"seconds_skew", r.seconds_skew},
       {"seconds_estimate", r.seconds_estimate},
       {"residual_history", r.residual_history}};
  if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
  if (r.estimate) j["estimate"] = *r.estimate;
}

/// CSV twin of the outer report: one row per outer iteration.
inline void write_outer_csv(std::ostream& out, const OuterReport& r) {
  out << "iter,rel_residual,inner_hermitian,inner_skew\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t k = 0; k < r.residual_history.size(); ++k) {
    out << k << ',' << r.residual_history[k] << ',';
    if (k > 0 && k - 1 < r.inner_hermitian.size()) out << r.inner_hermitian[k - 1];
    out << ',';
    if (k > 0 && k - 1 < r.inner_skew.size()) out << r.inner_skew[k - 1];
    out << '\n';
  }
}

}  // namespace hssgrad
