#include "kometo/baselines.hpp"

#include "kometo/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

namespace kometo {

namespace {

double harmonic(long long n) {
  double acc = 0.0;
  for (long long t = 1; t <= n; ++t) acc += 1.0 / static_cast<double>(t);
  return acc;
}

}  // namespace

OpeningSchedule OpeningSchedule::sequool(long long n) {
  OpeningSchedule s{Kind::kSequOOL, n, 0};
  if (n >= 1)
    s.max_depth = static_cast<long long>(static_cast<double>(n) / harmonic(n));
  return s;
}

OpeningSchedule OpeningSchedule::modified_sqrt(long long n) {
  return {Kind::kModifiedSqrt, n, n >= 1 ? n : 0};
}

OpeningSchedule OpeningSchedule::modified_log(long long n) {
  OpeningSchedule s{Kind::kModifiedLog, n, 0};
  if (n >= 1)
    s.max_depth = static_cast<long long>(
        static_cast<double>(n) / (std::numbers::e * std::numbers::e));
  return s;
}

long long schedule_counts(const OpeningSchedule& s, long long h) {
  if (h < 1 || h > s.max_depth) return 0;
  switch (s.kind) {
    case OpeningSchedule::Kind::kSequOOL:
      return s.max_depth / h;
    case OpeningSchedule::Kind::kModifiedSqrt:
      return static_cast<long long>(
          2.0 * std::sqrt(static_cast<double>(s.n) / static_cast<double>(h)));
    case OpeningSchedule::Kind::kModifiedLog: {
      const double lr =
          std::log(static_cast<double>(s.n) / static_cast<double>(h));
      return static_cast<long long>(static_cast<double>(s.n) /
                                    (static_cast<double>(h) * (lr * lr)));
    }
  }
  return 0;
}

std::string schedule_name(OpeningSchedule::Kind kind) {
  switch (kind) {
    case OpeningSchedule::Kind::kSequOOL:
      return "sequool";
    case OpeningSchedule::Kind::kModifiedSqrt:
      return "modified_sqrt";
    case OpeningSchedule::Kind::kModifiedLog:
      return "modified_log";
  }
  return "";
}

RegretTrace run_baseline(OpeningSchedule::Kind kind, Environment& env,
                         double budget, int arity) {
  const double unit = env.top_cost();
  if (!std::isfinite(unit))
    throw InapplicableEnvironment(
        "single-fidelity baseline needs a finite exact-evaluation cost");

  PartitionTree tree(env.domain(), arity);
  const CellKey root{0, CellIndex(0)};
  RegretTrace trace;
  trace.max_level = 0;
  trace.effective = static_cast<long long>(std::floor(budget / unit));
  if (trace.effective < 1) {
    trace.output = tree.cell(root).representative();
    trace.spent = env.ledger().spent();
    return trace;
  }

  OpeningSchedule sched;
  switch (kind) {
    case OpeningSchedule::Kind::kSequOOL:
      sched = OpeningSchedule::sequool(trace.effective);
      break;
    case OpeningSchedule::Kind::kModifiedSqrt:
      sched = OpeningSchedule::modified_sqrt(trace.effective);
      break;
    case OpeningSchedule::Kind::kModifiedLog:
      sched = OpeningSchedule::modified_log(trace.effective);
      break;
  }

  // Opens `key`: scores its children at the exact cost in index order,
  // stopping at the first the ledger cannot cover.
  auto open = [&](const CellKey& key) {
    auto children = tree.split(key);
    tree.ensure(key).opened_level = 0;
    trace.openings.push_back(Opening{key.depth, key.index, 0});
    for (const auto& ck : children) {
      if (!env.can_afford(unit)) {
        ++trace.skips;
        break;
      }
      const double v = env.evaluate_exact(tree.cell(ck).representative());
      tree.store_value(ck, 0, v);
      ++trace.evaluations;
    }
  };

  open(root);
  long long deepest = 0;
  for (long long h = 1; h <= sched.max_depth; ++h) {
    const long long quota = schedule_counts(sched, h);
    // Unopened scored cells at this depth, best value first; equal values
    // keep index order.
    std::vector<std::pair<double, CellKey>> ranked;
    for (const auto& key : tree.materialized_at(static_cast<int>(h))) {
      const auto& rec = tree.record(key);
      if (rec.opened_level.has_value()) continue;
      auto it = rec.values.find(0);
      if (it == rec.values.end()) continue;
      ranked.emplace_back(it->second, key);
    }
    std::stable_sort(
        ranked.begin(), ranked.end(),
        [](const auto& a, const auto& b) { return a.first > b.first; });

    long long opened = 0;
    for (const auto& rk : ranked) {
      if (opened >= quota) break;
      if (!env.can_afford(unit)) {
        ++trace.skips;
        break;
      }
      open(rk.second);
      ++opened;
    }
    if (opened > 0) deepest = h;
    if (opened == 0 && !env.can_afford(unit)) break;
  }

  // Output: the best-scored child under the deepest openings.
  std::optional<CellKey> best;
  double best_value = 0.0;
  for (const auto& key : tree.materialized_at(static_cast<int>(deepest) + 1)) {
    auto v = tree.value(key, 0);
    if (!v) continue;
    if (!best || *v > best_value) {
      best = key;
      best_value = *v;
    }
  }
  trace.output = tree.cell(best.value_or(root)).representative();
  trace.spent = env.ledger().spent();
  return trace;
}

}  // namespace kometo
