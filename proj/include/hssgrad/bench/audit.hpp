#pragma once

// Per-iteration operation counts checked against the reference cost rows.

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "../counters.hpp"
#include "../report.hpp"

namespace hssgrad::bench {

/// Expected core cost of one iteration. `i` is the number of stored
/// directions and only matters for ORTHODIR.
inline OpCounts cost_row(std::string_view method, std::uint64_t i = 0) {
  if (method == "cg") return {2, 3, 1};
  if (method == "bb") return {2, 2, 1};
  if (method == "cgne") return {2, 3, 2};
  if (method == "orthodir" || method.starts_with("orthodir(")) return {i + 2, 2 * i + 2, 1};
  throw std::invalid_argument("audit: unknown method '" + std::string(method) + "'");
}

struct AuditResult {
  std::string method;
  bool pass = true;
  std::vector<std::string> mismatches;
};

inline std::string format_counts(const OpCounts& c) {
  return "(" + std::to_string(c.dots) + "," + std::to_string(c.updates) + "," + std::to_string(c.matvecs) + ")";
}

/// ORTHODIR audit with explicit direction indices (restarted runs).
inline AuditResult audit_counters(const SolveReport& report, std::string_view method,
                                  const std::vector<std::size_t>& direction_index) {
  AuditResult out;
  out.method = std::string(method);
  if (direction_index.size() != report.per_iteration.size()) {
    out.pass = false;
    out.mismatches.push_back("direction index length differs from per-iteration counts");
    return out;
  }
  for (std::size_t k = 0; k < report.per_iteration.size(); ++k) {
    const OpCounts want = cost_row(method, direction_index[k]);
    if (report.per_iteration[k] != want) {
      out.pass = false;
      out.mismatches.push_back("iteration " + std::to_string(k) + " (i=" + std::to_string(direction_index[k]) +
                               "): " + format_counts(report.per_iteration[k]) + " != " + format_counts(want));
    }
  }
  return out;
}

/// Exact integer comparison. CG/BB/CGNE: total core counts must equal
/// iterations times the row. ORTHODIR: every recorded iteration must match
/// the row for its direction index; this overload assumes no restart.
inline AuditResult audit_counters(const SolveReport& report, std::string_view method) {
  const OpCounts row = cost_row(method);  // rejects unknown methods
  if (method == "orthodir" || method.starts_with("orthodir(")) {
    std::vector<std::size_t> index(report.per_iteration.size());
    for (std::size_t k = 0; k < index.size(); ++k) index[k] = k;
    auto out = audit_counters(report, method, index);
    if (report.per_iteration.size() != report.iterations) {
      out.pass = false;
      out.mismatches.push_back("per-iteration counts missing");
    }
    return out;
  }
  AuditResult out;
  out.method = std::string(method);
  const std::uint64_t k = report.iterations;
  const OpCounts want{row.dots * k, row.updates * k, row.matvecs * k};
  if (report.counters != want) {
    out.pass = false;
    out.mismatches.push_back("total " + format_counts(report.counters) + " != " + std::to_string(k) + " x " +
                             format_counts(row));
  }
  return out;
}

}  // namespace hssgrad::bench
