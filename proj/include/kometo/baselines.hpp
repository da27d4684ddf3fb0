#pragma once

#include "kometo/algorithm.hpp"
#include "kometo/fidelity.hpp"

#include <string>

namespace kometo {

// Per-depth opening budgets for the single-fidelity tree searches.  All
// three variants spend a nominal budget of n exact evaluations and differ
// only in how many cells they open at each depth h.
struct OpeningSchedule {
  enum class Kind {
    kSequOOL,       // floor(max_depth / h), down to depth floor(n / log-bar n)
    kModifiedSqrt,  // floor(2 sqrt(n/h)), down to depth n
    kModifiedLog,   // floor(n / (h ln^2(n/h))), down to depth floor(n / e^2)
  };

  Kind kind = Kind::kSequOOL;
  long long n = 0;
  long long max_depth = 0;

  static OpeningSchedule sequool(long long n);
  static OpeningSchedule modified_sqrt(long long n);
  static OpeningSchedule modified_log(long long n);
};

// Cells to open at depth h; zero outside [1, max_depth].
long long schedule_counts(const OpeningSchedule& s, long long h);

// Trace label for the variant ("sequool", "modified_sqrt", "modified_log").
std::string schedule_name(OpeningSchedule::Kind kind);

// Runs the depth-sweep search under the given opening schedule, evaluating
// only at the exact cost.  The cash budget converts to n = floor(budget /
// lambda(1)) nominal evaluations; the ledger still has the final word, so
// openings near exhaustion are skipped rather than overdrawn.  Throws
// InapplicableEnvironment when exact evaluations cost +infinity.
RegretTrace run_baseline(OpeningSchedule::Kind kind, Environment& env,
                         double budget, int arity = 2);

}  // namespace kometo
