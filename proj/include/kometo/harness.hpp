#pragma once

#include "kometo/algorithm.hpp"
#include "kometo/fidelity.hpp"

#include <string>
#include <vector>

namespace kometo {

// One output line of a sweep, exactly the CSV columns.  A NaN regret marks
// a cell that was skipped because the algorithm does not apply there (a
// baseline needing exact evaluations when the top cost is infinite).
struct TraceRow {
  std::string algorithm;
  std::string instance;
  double budget = 0.0;  // configured grid value: a multiple of lambda(1)
                        // when that is finite, absolute cash otherwise
  long long seed = 0;
  double spent = 0.0;   // cash the ledger recorded
  double regret = 0.0;
  double wall_ms = 0.0;
};

// Field-wise equality that treats two NaN regrets as equal.
bool same_row(const TraceRow& a, const TraceRow& b);

// Per-algorithm entry of a sweep.  `name` is one of "kometo", "sequool",
// "modified_sqrt", "modified_log", or "theorem3_bound" — the last is a
// regret-ceiling overlay, computed rather than run, and only defined for
// tree-instance sources (it needs the smoothness profile).  `options`
// applies to kometo alone; its budget and arity fields are set per cell.
struct AlgorithmSpec {
  std::string name;
  KometoConfig options;
};

struct ExperimentConfig {
  // Exactly one source: a registered benchmark or a tree-instance file.
  std::string benchmark;
  std::string instance_file;
  CostToBiasModel model = PolyDecay{1.0, 1.0};  // benchmark fidelity model
  double top_cost = kInf;                       // benchmark lambda(1)
  int arity = 2;                                // benchmark partition arity
  std::vector<AlgorithmSpec> algorithms;
  std::vector<double> budgets;
  std::vector<long long> seeds = {0};
  std::string csv_path;  // rows land here incrementally during the sweep
  std::string svg_path;  // optional plot
};

// Strict parse of the documented JSON schema; unknown keys anywhere are
// schema errors naming the offending key.
ExperimentConfig config_from_json(const std::string& text);

// The stock configuration behind the `bench` subcommand: PolyDecay{1,1}
// fidelities with lambda(1) = 100, budgets {10,50,100,200,400} x lambda(1),
// kometo vs. the sqrt and sequool baselines, seed 0, outputs
// "<name>_traces.csv" and "<name>_traces.svg".
ExperimentConfig bench_config(const std::string& benchmark_name);

// Runs every (algorithm, budget, seed) cell of the sweep; overlay rows are
// emitted once per budget with seed 0.  Finished rows are appended to
// csv_path as they complete (partial results survive a crash), then the
// file is rewritten in sorted order; the sorted rows are also returned.
// Emits the SVG when svg_path is set.
std::vector<TraceRow> run_experiment(const ExperimentConfig& config);

// Canonical output order: by algorithm, instance, budget, seed.
void sort_rows(std::vector<TraceRow>& rows);

// CSV with the fixed header `algorithm,instance,budget,seed,spent,regret,
// wall_ms`, fields quoted RFC-4180 style when they contain commas or
// quotes, doubles at 17 significant digits so parse(emit(rows)) == rows.
void emit_csv(const std::vector<TraceRow>& rows, const std::string& path);
std::vector<TraceRow> parse_csv(const std::string& path);

// Log-y regret-vs-budget polylines, one per algorithm, regret clamped to
// 1e-10 from below.  Algorithms with no finite cell are omitted from both
// the plot and the legend.
void emit_svg(const std::vector<TraceRow>& rows, const std::string& path);

}  // namespace kometo
