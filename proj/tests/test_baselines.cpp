#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kometo/baselines.hpp"
#include "kometo/tree_instance.hpp"

#include <cmath>
#include <map>
#include <vector>

using namespace kometo;

namespace {

// Same single-branch chain as the optimizer tests: leftmost cells over
// [0,1], exact above cost 1, optimum at x = 0.
TreeInstance chain_instance() {
  SmoothnessProfile prof{1.0, 0.5, 0.0, 2.0, 2};
  return adversarial_depth_instance(prof, Cutoff{1.0}, 64, BranchRule::fixed(0));
}

Environment unbounded_env(double budget) {
  MultiFidelityFunction fn;
  fn.domain = Box::unit(1);
  fn.target = [](const Point& x) { return -x[0]; };
  fn.fidelity = [](const Point& x, double) { return -x[0]; };
  fn.sup_value = 0.0;
  return Environment(std::move(fn), FidelitySchedule{kInf}, budget);
}

std::map<int, int> openings_per_depth(const RegretTrace& trace) {
  std::map<int, int> per;
  for (const auto& op : trace.openings) ++per[op.depth];
  return per;
}

}  // namespace

TEST_CASE("schedule counts match the closed forms") {
  const auto seq = OpeningSchedule::sequool(100);
  CHECK(seq.max_depth == 19);  // floor(100 / 5.18737...)
  CHECK(schedule_counts(seq, 1) == 19);
  CHECK(schedule_counts(seq, 2) == 9);
  CHECK(schedule_counts(seq, 19) == 1);
  CHECK(schedule_counts(seq, 20) == 0);
  CHECK(schedule_counts(seq, 0) == 0);

  const auto sq = OpeningSchedule::modified_sqrt(100);
  CHECK(sq.max_depth == 100);
  CHECK(schedule_counts(sq, 1) == 20);
  CHECK(schedule_counts(sq, 4) == 10);
  CHECK(schedule_counts(sq, 100) == 2);
  CHECK(schedule_counts(sq, 101) == 0);

  const auto lg = OpeningSchedule::modified_log(100);
  CHECK(lg.max_depth == 13);
  const std::vector<long long> expected{4, 3, 2, 2, 2, 2, 2, 1, 1, 1, 1, 1, 1};
  for (long long h = 1; h <= 13; ++h)
    CHECK(schedule_counts(lg, h) == expected[static_cast<std::size_t>(h - 1)]);
  CHECK(schedule_counts(lg, 14) == 0);

  const auto tiny = OpeningSchedule::sequool(1);
  CHECK(tiny.max_depth == 1);
  CHECK(schedule_counts(tiny, 1) == 1);
  CHECK(schedule_counts(tiny, 2) == 0);

  // Below e^2 evaluations the log schedule has no depths at all.
  CHECK(OpeningSchedule::modified_log(7).max_depth == 0);
}

TEST_CASE("modified-sqrt gold run descends the chain") {
  auto inst = chain_instance();
  auto env = inst.environment(16.0);
  auto trace = run_baseline(OpeningSchedule::Kind::kModifiedSqrt, env, 16.0);

  CHECK(trace.effective == 16);
  CHECK(trace.max_level == 0);
  CHECK(trace.spent == 16.0);
  CHECK(trace.evaluations == 16);
  CHECK(trace.skips == 2);

  const std::vector<Opening> expected{
      {0, CellIndex(0), 0}, {1, CellIndex(0), 0}, {1, CellIndex(1), 0},
      {2, CellIndex(0), 0}, {2, CellIndex(1), 0}, {2, CellIndex(2), 0},
      {2, CellIndex(3), 0}, {3, CellIndex(0), 0}};
  CHECK(trace.openings == expected);

  CHECK(trace.output == Point{0.03125});  // representative of [0, 1/16]'s left child
  CHECK(env.regret(trace.output) == 0.03125);
}

TEST_CASE("degenerate budget opens only the root") {
  auto inst = chain_instance();
  auto env = inst.environment(1.0);
  auto trace = run_baseline(OpeningSchedule::Kind::kSequOOL, env, 1.0);

  CHECK(trace.effective == 1);
  CHECK(trace.spent == 1.0);
  CHECK(trace.evaluations == 1);
  CHECK(trace.skips == 2);  // root's second child, then the depth-1 opening
  CHECK(trace.openings == std::vector<Opening>{{0, CellIndex(0), 0}});
  CHECK(trace.output == Point{0.25});  // best (only) evaluated child

  // Below one evaluation nothing runs at all.
  auto env0 = inst.environment(0.5);
  auto trace0 = run_baseline(OpeningSchedule::Kind::kModifiedSqrt, env0, 0.5);
  CHECK(trace0.effective == 0);
  CHECK(trace0.spent == 0.0);
  CHECK(trace0.openings.empty());
  CHECK(trace0.output == Point{0.5});
}

TEST_CASE("square-root schedule reaches the expected spot depths") {
  auto inst = chain_instance();
  {
    auto env = inst.environment(100.0);
    auto trace = run_baseline(OpeningSchedule::Kind::kModifiedSqrt, env, 100.0);
    CHECK(trace.spent == 100.0);
    CHECK(trace.openings.back().depth == 8);
    CHECK(trace.output == Point{std::ldexp(1.0, -10)});
  }
  {
    auto env = inst.environment(1000.0);
    auto trace = run_baseline(OpeningSchedule::Kind::kModifiedSqrt, env, 1000.0);
    CHECK(trace.spent == 1000.0);
    CHECK(trace.openings.back().depth == 35);
    CHECK(trace.output == Point{std::ldexp(1.0, -37)});
  }
}

TEST_CASE("output depth dominates the square-root floor") {
  auto inst = chain_instance();
  for (long long n = 16; n <= 1000; ++n) {
    auto env = inst.environment(static_cast<double>(n));
    auto trace = run_baseline(OpeningSchedule::Kind::kModifiedSqrt, env,
                              static_cast<double>(n));
    const long long floor_depth = static_cast<long long>(
        std::floor(std::sqrt(static_cast<double>(n / 2))));
    const long long output_depth = trace.openings.back().depth + 1;
    REQUIRE(output_depth >= floor_depth);
    REQUIRE(trace.spent <= static_cast<double>(n));
  }
}

TEST_CASE("baselines refuse an unbounded exact-evaluation cost") {
  for (auto kind : {OpeningSchedule::Kind::kSequOOL,
                    OpeningSchedule::Kind::kModifiedSqrt,
                    OpeningSchedule::Kind::kModifiedLog}) {
    auto env = unbounded_env(100.0);
    CHECK_THROWS_AS(run_baseline(kind, env, 100.0), InapplicableEnvironment);
  }
}

TEST_CASE("ledger is never overdrawn") {
  auto inst = chain_instance();
  for (auto kind : {OpeningSchedule::Kind::kSequOOL,
                    OpeningSchedule::Kind::kModifiedSqrt,
                    OpeningSchedule::Kind::kModifiedLog}) {
    for (double budget : {1.0, 2.5, 7.0, 16.0, 100.0, 317.0}) {
      auto env = inst.environment(budget);
      auto trace = run_baseline(kind, env, budget);
      REQUIRE(trace.spent <= budget);
      CHECK(trace.spent == env.ledger().spent());
      REQUIRE(inst.domain().contains(trace.output));
    }
  }
}

TEST_CASE("per-depth openings respect the schedule and the tree") {
  auto inst = chain_instance();
  for (auto kind : {OpeningSchedule::Kind::kSequOOL,
                    OpeningSchedule::Kind::kModifiedSqrt,
                    OpeningSchedule::Kind::kModifiedLog}) {
    auto env = inst.environment(100.0);
    auto trace = run_baseline(kind, env, 100.0);
    OpeningSchedule sched =
        kind == OpeningSchedule::Kind::kSequOOL ? OpeningSchedule::sequool(100)
        : kind == OpeningSchedule::Kind::kModifiedSqrt
            ? OpeningSchedule::modified_sqrt(100)
            : OpeningSchedule::modified_log(100);
    auto per = openings_per_depth(trace);
    CHECK(per[0] == 1);
    for (const auto& [depth, count] : per) {
      if (depth == 0) continue;
      REQUIRE(count <= schedule_counts(sched, depth));
      REQUIRE(count <= (1LL << depth));
    }
  }
}

TEST_CASE("log schedule with no depths still scores the root's children") {
  auto inst = chain_instance();
  auto env = inst.environment(7.0);
  auto trace = run_baseline(OpeningSchedule::Kind::kModifiedLog, env, 7.0);
  CHECK(trace.effective == 7);
  CHECK(trace.spent == 2.0);
  CHECK(trace.evaluations == 2);
  CHECK(trace.skips == 0);
  CHECK(trace.openings == std::vector<Opening>{{0, CellIndex(0), 0}});
  CHECK(trace.output == Point{0.25});
}
