#pragma once

#include <chrono>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "counters.hpp"

namespace hssgrad {

enum class SolveStatus { converged, max_iters, breakdown };

constexpr std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iters: return "max-iters";
    case SolveStatus::breakdown: return "breakdown";
  }
  return "unknown";
}

/// Outcome of one iterative solve.
///
/// `counters` holds only the work done inside iterations, so dividing by
/// `iterations` gives the per-iteration cost row. Setup work, residual
/// certification and periodic residual refreshes go to `overhead`.
struct SolveReport {
  std::string method;
  std::size_t iterations = 0;
  double final_rel_residual = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> residual_history;  ///< entry k: relative residual after k iterations
  OpCounts counters;
  OpCounts overhead;
  double seconds = 0.0;
  SolveStatus status = SolveStatus::max_iters;
  /// Per-iteration core counts; only filled by methods whose cost depends on
  /// the iteration index (ORTHODIR).
  std::vector<OpCounts> per_iteration;

  bool converged() const { return status == SolveStatus::converged; }
  OpCounts total() const { return counters + overhead; }
};

inline void write_residual_csv(std::ostream& out, const SolveReport& report) {
  out << "iter,rel_residual\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t k = 0; k < report.residual_history.size(); ++k) {
    out << k << ',' << report.residual_history[k] << '\n';
  }
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace hssgrad
