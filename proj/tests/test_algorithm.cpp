#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kometo/algorithm.hpp"
#include "kometo/tree_instance.hpp"

#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

using namespace kometo;

namespace {

// Single infinite-branch chain of leftmost cells over [0,1], exact above
// cost 1.  The optimum is x = 0: target(x) = -rho^(deepest leftmost cell
// containing x).
TreeInstance chain_instance() {
  SmoothnessProfile prof{1.0, 0.5, 0.0, 2.0, 2};
  return adversarial_depth_instance(prof, Cutoff{1.0}, 64, BranchRule::fixed(0));
}

Environment plain_env(std::function<double(const Point&, double)> fid,
                      std::function<double(const Point&)> target,
                      double sup, double budget) {
  MultiFidelityFunction fn;
  fn.domain = Box::unit(1);
  fn.target = std::move(target);
  fn.fidelity = std::move(fid);
  fn.sup_value = sup;
  return Environment(std::move(fn), FidelitySchedule{kInf}, budget);
}

}  // namespace

TEST_CASE("effective budget matches the closed form") {
  CHECK(effective_budget(1e6, 2) == 719);
  CHECK(effective_budget(1000.0, 2) == 2);
  CHECK(effective_budget(1300.0, 2) == 3);
  CHECK(effective_budget(1.0, 2) == 0);
  CHECK(effective_budget(10.0, 2) == 0);
  CHECK_THROWS_AS(effective_budget(0.5, 2), std::invalid_argument);
  CHECK_THROWS_AS(effective_budget(100.0, 1), std::invalid_argument);
}

TEST_CASE("exploration schedule enumerates the Zipf triples in loop order") {
  auto steps = exploration_schedule(10);
  REQUIRE(steps.size() == 27);  // sum over h of floor(10/h)
  std::vector<int> first_depth;
  for (const auto& s : steps)
    if (s.h == 1) first_depth.push_back(s.j);
  CHECK(first_depth == std::vector<int>{2, 1, 1, 0, 0, 0, 0, 0, 0, 0});
  CHECK(steps.back().h == 10);
  CHECK(steps.back().m == 1);
  CHECK(steps.back().j == 0);

  auto tiny = exploration_schedule(3);
  std::vector<ScheduleStep> expected{{1, 1, 1}, {1, 2, 0}, {1, 3, 0},
                                     {2, 1, 0}, {3, 1, 0}};
  CHECK(tiny == expected);

  CHECK_THROWS_AS(exploration_schedule(0), std::invalid_argument);
}

TEST_CASE("opening a cell flags and (eagerly) evaluates every child level") {
  auto env = plain_env([](const Point& x, double) { return x[0]; },
                       [](const Point& x) { return x[0]; }, 1.0, 100.0);
  KometoConfig cfg;
  cfg.budget = 100.0;
  KometoState st(cfg, env, 20);  // max level 2
  st.open_cell(CellKey{0, 0}, 2, true);

  CHECK(st.evaluations() == 6);  // two children at costs 1, e, e^2
  double e1 = std::exp(1.0);
  double e2 = std::exp(2.0);
  CHECK(env.ledger().spent() ==
        doctest::Approx(2.0 * (1.0 + e1 + e2)).epsilon(1e-14));
  CHECK(env.ledger().spent() < 2.0 * e2 * e1 / (e1 - 1.0));  // geometric cap
  REQUIRE(st.openings().size() == 1);
  CHECK(st.openings()[0] == Opening{0, 0, 2});
  for (int u = 0; u <= 2; ++u) {
    CHECK(st.tree().find(CellKey{1, 0})->is_requestable(u));
    CHECK(st.tree().find(CellKey{1, 1})->is_requestable(u));
  }

  // Re-opening at a lower level is a complete no-op.
  auto rev = st.tree().flag_revision(1);
  double spent = env.ledger().spent();
  st.open_cell(CellKey{0, 0}, 1, true);
  CHECK(st.tree().flag_revision(1) == rev);
  CHECK(env.ledger().spent() == spent);
  CHECK(st.openings().size() == 1);
  CHECK(*st.tree().find(CellKey{0, 0})->opened_level == 2);
}

TEST_CASE("lazy run on the chain instance: trace, spend, output") {
  auto inst = chain_instance();
  auto env = inst.environment(1000.0);
  KometoConfig cfg;
  cfg.budget = 1000.0;
  auto tr = run_kometo(cfg, env);

  CHECK(tr.effective == 2);
  CHECK(tr.max_level == 0);
  std::vector<Opening> expected{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {2, 0, 0}};
  CHECK(tr.openings == expected);
  CHECK(tr.spent == 7.0);
  CHECK(tr.evaluations == 7);
  CHECK(tr.skips == 0);
  CHECK(tr.output == Point{0.125});
  CHECK(env.regret(tr.output) == 0.125);
}

TEST_CASE("eager run evaluates children of every opened cell up front") {
  auto inst = chain_instance();
  auto env = inst.environment(1000.0);
  KometoConfig cfg;
  cfg.budget = 1000.0;
  cfg.lazy_child_evaluation = false;
  auto tr = run_kometo(cfg, env);

  std::vector<Opening> expected{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {2, 0, 0}};
  CHECK(tr.openings == expected);
  CHECK(tr.spent == 9.0);
  CHECK(tr.evaluations == 9);
  CHECK(tr.output == Point{0.0625});
  CHECK(env.regret(tr.output) == 0.0625);
}

TEST_CASE("cross-validation re-ranks candidates at the exact fidelity") {
  // Low fidelity rewards large x, the target rewards small x.  The level-0
  // winner (deep right cell) loses the final comparison to the level-1
  // candidate observed at the faithful fidelity.
  double e1 = std::exp(1.0);
  auto env = plain_env(
      [e1](const Point& x, double c) { return c < e1 ? x[0] : 1.0 - x[0]; },
      [](const Point& x) { return 1.0 - x[0]; }, 1.0, 1300.0);
  KometoConfig cfg;
  cfg.budget = 1300.0;
  auto tr = run_kometo(cfg, env);

  CHECK(tr.effective == 3);
  CHECK(tr.max_level == 1);
  std::vector<Opening> expected{
      {0, 0, 1}, {1, 0, 1}, {1, 1, 0}, {2, 3, 0}, {3, 7, 0}};
  CHECK(tr.openings == expected);
  CHECK(tr.spent == doctest::Approx(14.0 + 2.0 * e1).epsilon(1e-14));
  CHECK(tr.skips >= 1);  // the third depth-1 step finds nothing to open
  CHECK(tr.output == Point{0.25});
}

TEST_CASE("duplicate candidates share one final evaluation") {
  auto inst = chain_instance();
  auto env = inst.environment(1000.0);
  KometoConfig cfg;
  cfg.budget = 1000.0;
  KometoState st(cfg, env, 3);  // max level 1: two candidate slots
  st.initialize();
  Point out = st.cross_validate();

  // Both level winners are cell (1,0); its representative is evaluated once.
  CHECK(env.ledger().spent() == 5.0);
  CHECK(out == Point{0.25});
}

TEST_CASE("degenerate effective budget returns the domain midpoint") {
  auto inst = chain_instance();
  auto env = inst.environment(1.0);
  KometoConfig cfg;
  cfg.budget = 1.0;
  auto tr = run_kometo(cfg, env);

  CHECK(tr.effective == 0);
  CHECK(tr.max_level == -1);
  CHECK(tr.openings.empty());
  CHECK(tr.evaluations == 0);
  CHECK(tr.spent == 0.0);
  CHECK(tr.output == Point{0.5});

  KometoConfig bad;
  bad.budget = 0.5;
  CHECK_THROWS_AS(run_kometo(bad, env), std::invalid_argument);
}

TEST_CASE("budget exhaustion degrades to skips, never an abort") {
  auto inst = chain_instance();
  auto env = inst.environment(3.0);
  KometoConfig cfg;
  cfg.budget = 3.0;
  KometoState st(cfg, env, 2);
  st.initialize();                  // two children at cost 1 each
  st.select_and_open(1, 0);         // cached values, free
  st.select_and_open(2, 0);         // affords one fetch, skips the other
  Point out = st.cross_validate();  // final evaluation unaffordable

  CHECK(env.ledger().spent() == 3.0);
  CHECK(st.skips() == 2);
  CHECK(out == Point{0.125});  // falls back to the lowest-level candidate
}

TEST_CASE("middle-child observations are reused from the parent when free") {
  auto target = [](const Point& x) { return 1.0 - x[0]; };
  auto fid = [](const Point& x, double) { return 1.0 - x[0]; };

  for (bool reuse : {true, false}) {
    MultiFidelityFunction fn;
    fn.domain = Box::unit(1);
    fn.target = target;
    fn.fidelity = fid;
    fn.sup_value = 1.0;
    Environment env(fn, FidelitySchedule{kInf}, 100.0);

    KometoConfig cfg;
    cfg.budget = 100.0;
    cfg.arity = 3;
    cfg.parent_reuse = reuse;
    KometoState st(cfg, env, 1);  // max level 0
    st.initialize();              // root: no parent, all 3 children charged
    CHECK(env.ledger().spent() == 3.0);
    st.open_cell(CellKey{1, 0}, 0, true);
    CHECK(env.ledger().spent() == (reuse ? 5.0 : 6.0));
    if (reuse)
      CHECK(*st.tree().value(CellKey{2, 1}, 0) ==
            *st.tree().value(CellKey{1, 0}, 0));
  }
}

TEST_CASE("predicted worst-case spend and the dichotomy bracket") {
  CHECK(predicted_spend(0, 2, true) == 0.0);
  CHECK(predicted_spend(2, 2, true) == 10.0);
  // Arity 3 with reuse saves one child per non-root opening.
  CHECK(predicted_spend(1, 3, true) == 6.0);
  CHECK(predicted_spend(1, 3, false) == 7.0);

  for (long long lt = 1; lt < 200; ++lt)
    CHECK(predicted_spend(lt, 2, true) <= predicted_spend(lt + 1, 2, true));

  CHECK(optimize_effective_budget(10.0, 2, true) == 2);
  for (double budget : {10.0, 1000.0, 1e6}) {
    long long best = optimize_effective_budget(budget, 2, true);
    CHECK(best >= effective_budget(budget, 2));
    CHECK(predicted_spend(best, 2, true) <= budget);
    CHECK(predicted_spend(best + 1, 2, true) > budget);
  }
}

TEST_CASE("run with optimized effective budget still respects the ledger") {
  auto inst = chain_instance();
  for (double budget : {10.0, 100.0, 1000.0, 10000.0}) {
    auto env = inst.environment(budget);
    KometoConfig cfg;
    cfg.budget = budget;
    cfg.budget_optimization = true;
    auto tr = run_kometo(cfg, env);
    CHECK(tr.spent <= budget);
    CHECK(tr.effective >= effective_budget(budget, 2));
  }
}

TEST_CASE("requestable sets stay parent-closed and openings stay unique") {
  auto inst = chain_instance();
  auto env = inst.environment(10000.0);
  KometoConfig cfg;
  cfg.budget = 10000.0;
  KometoState st(cfg, env, effective_budget(10000.0, 2));
  st.initialize();
  st.explore();
  st.cross_validate();

  long long lt = st.effective_budget();
  for (const auto& [key, rec] : st.tree().records()) {
    for (int u = 0; u < static_cast<int>(rec.requestable.size()); ++u) {
      if (!rec.requestable[u]) continue;
      if (key.depth == 0) continue;
      const CellRecord* parent = st.tree().find(parent_of(key, 2));
      REQUIRE(parent != nullptr);
      CHECK(parent->is_requestable(u));
    }
  }

  std::map<int, long long> per_depth;
  std::set<std::pair<int, CellIndex>> seen;
  for (const auto& o : st.openings()) {
    CHECK(seen.insert({o.depth, o.index}).second);  // no cell opened twice
    if (o.depth >= 1) ++per_depth[o.depth];
  }
  for (const auto& [h, count] : per_depth) {
    CHECK(count <= lt / h);
    if (h < 20) CHECK(count <= (1LL << h));
  }
}

TEST_CASE("observation distortions never change decisions") {
  auto inst = chain_instance();
  KometoConfig cfg;
  cfg.budget = 5000.0;

  auto plain_fn = inst.function();
  Environment plain(plain_fn, inst.schedule(), cfg.budget);
  auto plain_tr = run_kometo(cfg, plain);

  auto warped_fn = inst.function();
  warped_fn.distortion = [](double v, double) { return 2.0 * v + 3.0; };
  Environment warped(warped_fn, inst.schedule(), cfg.budget);
  auto warped_tr = run_kometo(cfg, warped);

  CHECK(plain_tr.openings == warped_tr.openings);
  CHECK(plain_tr.output == warped_tr.output);
  CHECK(plain_tr.spent == warped_tr.spent);
}
