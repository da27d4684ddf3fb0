#pragma once

#include "kometo/fidelity.hpp"
#include "kometo/partition.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace kometo {

// Knobs of one optimizer run.  `budget` is the raw evaluation budget the
// ledger enforces; everything else shapes how it is spent.
struct KometoConfig {
  double budget = 1.0;
  int arity = 2;
  // Replace the closed-form effective budget by the largest value whose
  // predicted worst-case spend still fits the raw budget.
  bool budget_optimization = false;
  // Fetch child values only when a selection or cross-validation step first
  // reads them; off means every opening evaluates all children immediately.
  bool lazy_child_evaluation = true;
  // With odd arity, the middle child's representative coincides with its
  // parent's, so an already-observed parent value is copied free of charge.
  bool parent_reuse = true;
};

// floor((e-1) * budget / (2 * arity * e * (ln(budget) + 1)^2)): the number
// of schedule units the raw budget safely funds.  May be 0, in which case a
// run degenerates to returning the domain midpoint.
long long effective_budget(double budget, int arity);

// One entry of the exploration schedule: open the best depth-h cell at
// fidelity level j; m counts the visits to that depth so far.
struct ScheduleStep {
  long long h = 1;
  long long m = 1;
  int j = 0;

  friend bool operator==(const ScheduleStep& a, const ScheduleStep& b) {
    return a.h == b.h && a.m == b.m && a.j == b.j;
  }
};

// The Zipf exploration schedule: for h = 1..effective, m = 1..effective/h,
// j = floor(ln(effective / (h*m))).  Deeper cells get fewer, cheaper looks.
std::vector<ScheduleStep> exploration_schedule(long long effective);

// Worst-case spend of a run at the given effective budget: the init
// opening, every schedule step charged as a full eager opening capped by
// the number of cells a depth can hold, and one final evaluation per
// fidelity level.  Pure arithmetic, no environment access.
double predicted_spend(long long effective, int arity, bool parent_reuse);

// Largest effective budget whose predicted spend fits the raw budget,
// found by doubling plus bisection (the predictor is non-decreasing).
long long optimize_effective_budget(double budget, int arity,
                                    bool parent_reuse);

// A cell opening the run performed, in execution order.
struct Opening {
  int depth = 0;
  CellIndex index = 0;
  int level = 0;

  friend bool operator==(const Opening& a, const Opening& b) {
    return a.depth == b.depth && a.level == b.level && a.index == b.index;
  }
};

// Everything a finished run exposes: the chosen point, the ledger total it
// consumed, and the decision trace the invariant tests inspect.
struct RegretTrace {
  Point output;
  double spent = 0.0;
  long long effective = 0;  // schedule units (baselines: evaluation count)
  int max_level = -1;       // highest fidelity level in play; -1 if none
  std::vector<Opening> openings;
  std::size_t evaluations = 0;  // charged environment requests
  std::size_t skips = 0;        // steps or fetches dropped by the guards
};

// Mutable state of one run: the partition with its per-cell level flags and
// cached observations, plus per-depth ranked candidate pools so selection
// does not rescan the tree on every schedule step.  Exposed so tests can
// drive the phases individually; run_kometo is the packaged loop.
class KometoState {
 public:
  KometoState(const KometoConfig& config, Environment& env,
              long long effective);

  // Opens the root at the top fidelity level and evaluates its children
  // there and below, so every level owns at least one observation.
  void initialize();

  // Runs the exploration schedule, one select_and_open per step.
  void explore();

  // Per level: the best-observed cell becomes a candidate, re-evaluated at
  // cost `effective`; returns the candidate winning that final comparison
  // (ties to the lowest level).  Candidates whose final evaluation is
  // unaffordable drop out; if all drop, the lowest-level candidate point is
  // returned, and with no candidates at all, the domain midpoint.
  Point cross_validate();

  // Cached-or-fetched observation of a cell at a fidelity level.  Fetching
  // requires the level flag; an unaffordable charge records a skip and
  // yields nothing (permanently: budgets only shrink).
  std::optional<double> value_at(const CellKey& key, int level);

  // Splits the cell, flags every child at levels 0..level, and with `eager`
  // fetches all those child values now.  Re-opening at or below a previous
  // level is a no-op.
  void open_cell(const CellKey& key, int level, bool eager);

  // Opens the unopened depth-h cell with the highest observed value at the
  // level (lowest index on ties).  Returns the opened cell, or nothing —
  // recorded as a skip — when no candidate exists or none is affordable.
  std::optional<CellKey> select_and_open(long long depth, int level);

  long long effective_budget() const { return effective_; }
  int max_level() const { return max_level_; }
  const PartitionTree& tree() const { return tree_; }
  const std::vector<Opening>& openings() const { return openings_; }
  std::size_t evaluations() const { return evaluations_; }
  std::size_t skips() const { return skips_; }

 private:
  // Ranked views of one depth's candidates, one per fidelity level, built
  // lazily and invalidated by the tree's O(1) count/flag counters.
  struct LevelRank {
    std::size_t cursor = 0;  // next snapshot cell to ingest
    std::multimap<double, CellKey, std::greater<double>> ranked;
  };
  struct DepthPool {
    std::optional<std::pair<std::size_t, std::uint64_t>> built_for;
    std::vector<CellKey> cells;  // index-ordered snapshot
    std::map<int, LevelRank> levels;
  };

  KometoConfig config_;
  Environment& env_;
  long long effective_;
  int max_level_;
  PartitionTree tree_;
  std::vector<Opening> openings_;
  std::size_t evaluations_ = 0;
  std::size_t skips_ = 0;
  int deepest_ = 0;  // deepest materialized depth
  std::map<int, DepthPool> pools_;
};

// The full run: effective-budget preprocessing (closed form or optimized),
// init, exploration, cross-validation.  Budget exhaustion downgrades to
// skips; the run always returns an output.
RegretTrace run_kometo(const KometoConfig& config, Environment& env);

}  // namespace kometo
