#include "kometo/algorithm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace kometo {

namespace {

// Fidelity level of schedule step (h, m): floor(ln(effective / (h*m))).
// h*m <= effective keeps the ratio >= 1; the clamp only swallows rounding
// dust when the ratio lands exactly on 1.
int schedule_level(long long effective, long long h, long long m) {
  double ratio = static_cast<double>(effective) /
                 (static_cast<double>(h) * static_cast<double>(m));
  int j = static_cast<int>(std::floor(std::log(ratio)));
  return j < 0 ? 0 : j;
}

// Sum of e^u for u = 0..level: the eager cost of one child across all its
// requestable levels.  Levels beyond 63 would need budgets past 1e27.
double cum_levels(int level) {
  static const std::array<double, 64> table = [] {
    std::array<double, 64> t{};
    double sum = 0.0;
    for (int u = 0; u < 64; ++u) {
      sum += std::exp(static_cast<double>(u));
      t[u] = sum;
    }
    return t;
  }();
  if (level < 0) return 0.0;
  return table[std::min(level, 63)];
}

}  // namespace

long long effective_budget(double budget, int arity) {
  if (!(budget >= 1.0))
    throw std::invalid_argument("budget must be at least 1");
  if (arity < 2) throw std::invalid_argument("arity must be at least 2");
  constexpr double e = std::numbers::e;
  double log_term = std::log(budget) + 1.0;
  double value = (e - 1.0) * budget / (2.0 * arity * e * log_term * log_term);
  return static_cast<long long>(std::floor(value));
}

std::vector<ScheduleStep> exploration_schedule(long long effective) {
  if (effective < 1)
    throw std::invalid_argument("effective budget must be at least 1");
  std::vector<ScheduleStep> steps;
  for (long long h = 1; h <= effective; ++h) {
    long long mmax = effective / h;
    for (long long m = 1; m <= mmax; ++m)
      steps.push_back({h, m, schedule_level(effective, h, m)});
  }
  return steps;
}

double predicted_spend(long long effective, int arity, bool parent_reuse) {
  if (effective < 1) return 0.0;
  int top = static_cast<int>(std::floor(std::log(static_cast<double>(effective))));
  double total = arity * cum_levels(top);  // init: root has no observed parent
  int saved = (parent_reuse && arity % 2 == 1) ? 1 : 0;
  for (long long h = 1; h <= effective; ++h) {
    long long mcap = effective / h;
    long long pow_cap = 1;  // min(arity^h, mcap), without overflowing
    for (long long t = 0; t < h && pow_cap < mcap; ++t) {
      if (pow_cap > std::numeric_limits<long long>::max() / arity) {
        pow_cap = mcap;
        break;
      }
      pow_cap *= arity;
    }
    long long mlim = std::min(mcap, pow_cap);
    for (long long m = 1; m <= mlim; ++m)
      total += (arity - saved) * cum_levels(schedule_level(effective, h, m));
  }
  total += (top + 1) * static_cast<double>(effective);  // final evaluations
  return total;
}

long long optimize_effective_budget(double budget, int arity,
                                    bool parent_reuse) {
  if (!(budget >= 1.0))
    throw std::invalid_argument("budget must be at least 1");
  if (arity < 2) throw std::invalid_argument("arity must be at least 2");
  if (predicted_spend(1, arity, parent_reuse) > budget) return 0;
  long long lo = 1;
  long long hi = 2;
  while (predicted_spend(hi, arity, parent_reuse) <= budget) {
    lo = hi;
    if (hi > (1LL << 61)) break;
    hi *= 2;
  }
  while (hi - lo > 1) {
    long long mid = lo + (hi - lo) / 2;
    if (predicted_spend(mid, arity, parent_reuse) <= budget)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

KometoState::KometoState(const KometoConfig& config, Environment& env,
                         long long effective)
    : config_(config),
      env_(env),
      effective_(effective),
      max_level_(effective >= 1
                     ? static_cast<int>(std::floor(
                           std::log(static_cast<double>(effective))))
                     : -1),
      tree_(env.domain(), config.arity) {
  if (config.arity < 2)
    throw std::invalid_argument("arity must be at least 2");
}

std::optional<double> KometoState::value_at(const CellKey& key, int level) {
  if (auto cached = tree_.value(key, level)) return cached;
  const CellRecord* rec = tree_.find(key);
  if (!rec || !rec->is_requestable(level)) return std::nullopt;

  if (config_.parent_reuse && key.depth >= 1 && config_.arity % 2 == 1) {
    int slot = static_cast<int>((key.index % config_.arity).convert_to<int>());
    if (inherits_representative(config_.arity, slot)) {
      CellKey parent = parent_of(key, config_.arity);
      if (auto inherited = tree_.value(parent, level)) {
        tree_.store_value(key, level, *inherited);
        return inherited;
      }
    }
  }

  double cost = std::exp(static_cast<double>(level));
  if (!env_.can_afford(cost)) {
    ++skips_;
    return std::nullopt;
  }
  double observed;
  try {
    observed = env_.evaluate_at_cost(rec->cell.representative(), cost);
  } catch (const BudgetExceeded&) {
    ++skips_;
    return std::nullopt;
  }
  ++evaluations_;
  tree_.store_value(key, level, observed);
  return observed;
}

void KometoState::open_cell(const CellKey& key, int level, bool eager) {
  CellRecord& rec = tree_.ensure(key);
  if (rec.opened_level && *rec.opened_level >= level) return;
  bool first = !rec.opened_level.has_value();
  auto children = tree_.split(key);
  for (const auto& child : children)
    for (int u = 0; u <= level; ++u) tree_.mark_requestable(child, u);
  rec.opened_level = level;
  if (first) openings_.push_back(Opening{key.depth, key.index, level});
  deepest_ = std::max(deepest_, key.depth + 1);
  if (eager)
    for (int u = 0; u <= level; ++u)
      for (const auto& child : children) value_at(child, u);
}

std::optional<CellKey> KometoState::select_and_open(long long depth,
                                                    int level) {
  if (depth < 1 || depth > deepest_) {
    ++skips_;
    return std::nullopt;
  }
  int d = static_cast<int>(depth);
  DepthPool& pool = pools_[d];
  auto snapshot =
      std::make_pair(tree_.materialized_count(d), tree_.flag_revision(d));
  if (!pool.built_for || *pool.built_for != snapshot) {
    pool.cells = tree_.materialized_at(d);
    pool.levels.clear();
    pool.built_for = snapshot;
  }
  LevelRank& rank = pool.levels[level];
  while (rank.cursor < pool.cells.size()) {
    const CellKey& key = pool.cells[rank.cursor++];
    const CellRecord* rec = tree_.find(key);
    if (!rec || rec->opened_level || !rec->is_requestable(level)) continue;
    if (auto observed = value_at(key, level))
      rank.ranked.emplace(*observed, key);
    // Unaffordable fetches stay out for good: budgets only shrink.
  }
  while (!rank.ranked.empty()) {
    auto it = rank.ranked.begin();
    CellKey key = it->second;
    rank.ranked.erase(it);
    if (tree_.find(key)->opened_level) continue;  // opened via another level
    open_cell(key, level, !config_.lazy_child_evaluation);
    return key;
  }
  ++skips_;
  return std::nullopt;
}

void KometoState::initialize() {
  if (effective_ < 1) return;
  CellKey root{0, 0};
  // The root's own flags keep every flagged set parent-closed.
  for (int u = 0; u <= max_level_; ++u) tree_.mark_requestable(root, u);
  // Always eager: cross-validation needs at least one observation per
  // level, whatever the laziness flag says about later openings.
  open_cell(root, max_level_, true);
}

void KometoState::explore() {
  if (effective_ < 1) return;
  for (long long h = 1; h <= effective_; ++h) {
    long long mmax = effective_ / h;
    for (long long m = 1; m <= mmax; ++m)
      select_and_open(h, schedule_level(effective_, h, m));
  }
}

Point KometoState::cross_validate() {
  if (effective_ < 1 || max_level_ < 0) return env_.domain().midpoint();

  // Per level, the best materialized observation below the root.
  std::vector<std::optional<std::pair<CellKey, double>>> winner(max_level_ +
                                                                1);
  for (const auto& [key, rec] : tree_.records()) {
    if (key.depth < 1) continue;
    for (const auto& [level, observed] : rec.values) {
      if (level > max_level_) continue;
      auto& best = winner[level];
      if (!best || observed > best->second) best.emplace(key, observed);
    }
  }

  std::vector<std::optional<Point>> candidate(max_level_ + 1);
  std::map<Point, double> final_scores;  // dedupes identical points
  double final_cost = static_cast<double>(effective_);
  int best_level = -1;
  double best_score = 0.0;
  for (int j = 0; j <= max_level_; ++j) {
    if (!winner[j]) continue;
    Point x = tree_.find(winner[j]->first)->cell.representative();
    candidate[j] = x;
    auto it = final_scores.find(x);
    if (it == final_scores.end()) {
      if (!env_.can_afford(final_cost)) {
        ++skips_;
        continue;
      }
      double observed;
      try {
        observed = env_.evaluate_at_cost(x, final_cost);
      } catch (const BudgetExceeded&) {
        ++skips_;
        continue;
      }
      ++evaluations_;
      it = final_scores.emplace(std::move(x), observed).first;
    }
    if (best_level < 0 || it->second > best_score) {
      best_score = it->second;
      best_level = j;
    }
  }
  if (best_level >= 0) return *candidate[best_level];
  for (int j = 0; j <= max_level_; ++j)
    if (candidate[j]) return *candidate[j];
  return tree_.root().representative();
}

RegretTrace run_kometo(const KometoConfig& config, Environment& env) {
  if (!(config.budget >= 1.0))
    throw std::invalid_argument("budget must be at least 1");
  if (config.arity < 2)
    throw std::invalid_argument("arity must be at least 2");
  long long effective =
      config.budget_optimization
          ? optimize_effective_budget(config.budget, config.arity,
                                      config.parent_reuse)
          : effective_budget(config.budget, config.arity);
  KometoState state(config, env, effective);
  if (effective >= 1) {
    state.initialize();
    state.explore();
  }
  RegretTrace trace;
  trace.output = state.cross_validate();
  trace.spent = env.ledger().spent();
  trace.effective = effective;
  trace.max_level = state.max_level();
  trace.openings = state.openings();
  trace.evaluations = state.evaluations();
  trace.skips = state.skips();
  return trace;
}

}  // namespace kometo
