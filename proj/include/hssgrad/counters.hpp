#pragma once

#include <cstdint>

namespace hssgrad {

/// Operation tallies in the units of the classic per-iteration cost table:
/// inner products, vector updates (axpy-like sweeps) and operator applications.
struct OpCounts {
  std::uint64_t dots = 0;
  std::uint64_t updates = 0;
  std::uint64_t matvecs = 0;

  OpCounts& operator+=(const OpCounts& o) {
    dots += o.dots;
    updates += o.updates;
    matvecs += o.matvecs;
    return *this;
  }
  friend OpCounts operator+(OpCounts a, const OpCounts& b) { return a += b; }
  friend OpCounts operator-(const OpCounts& a, const OpCounts& b) {
    return {a.dots - b.dots, a.updates - b.updates, a.matvecs - b.matvecs};
  }
  friend bool operator==(const OpCounts&, const OpCounts&) = default;
};

/// RAII counting scope. While alive it is the innermost scope of the calling
/// thread; every counted kernel increments it and all enclosing scopes, so a
/// parent always sees the totals of its children.
///
/// Scopes must be destroyed in reverse order of construction, which holds for
/// stack objects.
class CountingScope {
 public:
  CountingScope() : parent_(current_) { current_ = this; }
  ~CountingScope() { current_ = parent_; }

  CountingScope(const CountingScope&) = delete;
  CountingScope& operator=(const CountingScope&) = delete;

  const OpCounts& counts() const { return counts_; }

  static void record_dot() {
    for (auto* s = current_; s != nullptr; s = s->parent_) ++s->counts_.dots;
  }
  static void record_update() {
    for (auto* s = current_; s != nullptr; s = s->parent_) ++s->counts_.updates;
  }
  static void record_matvec() {
    for (auto* s = current_; s != nullptr; s = s->parent_) ++s->counts_.matvecs;
  }

 private:
  OpCounts counts_;
  CountingScope* parent_;
  inline static thread_local CountingScope* current_ = nullptr;
};

/// Splits the work of a solver run into the per-iteration core and the
/// overhead (setup, residual checks, periodic recomputation).
class CostLedger {
 public:
  template <class F>
  decltype(auto) overhead(F&& f) {
    struct Charge {
      CostLedger& ledger;
      CountingScope scope;
      ~Charge() { ledger.overhead_ += scope.counts(); }
    } charge{*this, {}};
    return f();
  }

  OpCounts total() const { return total_.counts(); }
  OpCounts overhead_counts() const { return overhead_; }
  OpCounts core() const { return total_.counts() - overhead_; }

 private:
  CountingScope total_;
  OpCounts overhead_;
};

}  // namespace hssgrad
