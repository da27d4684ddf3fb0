#pragma once

#include "kometo/fidelity.hpp"
#include "kometo/partition.hpp"

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace kometo {

// Near-optimality geometry of an instance: within depth-h optimal cells the
// target stays within nu*rho^h of the optimum, and at most C*rho^(-d*h)
// cells per depth come within 3*nu*rho^h of it.
struct SmoothnessProfile {
  double nu = 1.0;
  double rho = 0.5;
  double d = 0.0;
  double C = 2.0;
  int K = 2;

  // Largest d representable with K children per cell.
  double d_max() const;
  // Smallest admissible C for this (K, rho, d).
  double c_min() const;
  void validate() const;
  std::string describe() const;
};

// Deterministic choice of the child continuing the infinite optimal branch
// below the explicitly materialized part of a tree.
struct BranchRule {
  enum class Kind { kFixedChild, kSeeded };
  Kind kind = Kind::kFixedChild;
  int child = 0;
  std::uint64_t seed = 0;

  int child_at(int depth, int arity) const;

  static BranchRule fixed(int child) {
    return BranchRule{Kind::kFixedChild, child, 0};
  }
  static BranchRule seeded(std::uint64_t seed) {
    return BranchRule{Kind::kSeeded, 0, seed};
  }
};

// A prefix-closed set of cells with at least one cell per depth: explicit
// node sets up to `explicit_depth`, then a single infinite branch continued
// from `anchor` by the rule.  Immutable once built; safe to share.
class TruncatedTree {
 public:
  TruncatedTree(int arity, std::vector<std::set<CellIndex>> levels,
                CellIndex anchor, BranchRule rule, int precompute_depth = 2048);

  int arity() const { return arity_; }
  int explicit_depth() const { return static_cast<int>(levels_.size()) - 1; }

  bool contains(int depth, const CellIndex& index) const;
  std::size_t node_count(int depth) const;
  std::vector<CellIndex> nodes_at(int depth) const;

  // Index of the infinite branch's cell at a depth.
  CellIndex branch_index(int depth) const;
  bool on_branch(int depth, const CellIndex& index) const;

  // Children of (depth, index) that are themselves in the tree.
  int children_in_tree(int depth, const CellIndex& index) const;

  // Structural soundness: root present, every level non-empty, every node's
  // parent present, anchor on the deepest explicit level.  Returns an empty
  // string when sound, else a description of the first defect.
  std::string structural_defect() const;

  const std::vector<std::set<CellIndex>>& levels() const { return levels_; }
  const CellIndex& anchor() const { return anchor_; }
  const BranchRule& rule() const { return rule_; }

 private:
  int arity_;
  std::vector<std::set<CellIndex>> levels_;
  CellIndex anchor_;
  BranchRule rule_;
  std::vector<CellIndex> branch_below_;  // branch indices past explicit_depth
};

// A synthetic objective realized on the partition hierarchy: the target of a
// point is -nu*rho^h for the deepest tree slice still containing it (0 on
// the infinite branch), and the fidelity bought at cost c observes
// min(target, -phi(c)).  sup f = 0.
class TreeInstance {
 public:
  TreeInstance(SmoothnessProfile profile, CostToBiasModel model,
               TruncatedTree tree, Box domain, std::string name);

  const SmoothnessProfile& profile() const { return profile_; }
  const CostToBiasModel& model() const { return model_; }
  const TruncatedTree& tree() const { return *tree_; }
  const Box& domain() const { return domain_; }
  const std::string& name() const { return name_; }

  double target(const Point& x) const;
  double fidelity(const Point& x, double cost) const;

  // Deepest depth at which x still lies in the tree; -1 past underflow.
  int containment_depth(const Point& x) const;

  MultiFidelityFunction function() const;
  FidelitySchedule schedule() const;
  Environment environment(double budget) const;

  std::string to_json() const;
  static TreeInstance from_json(const std::string& text);

 private:
  SmoothnessProfile profile_;
  CostToBiasModel model_;
  std::shared_ptr<const TruncatedTree> tree_;
  Box domain_;
  std::string name_;
};

// Single infinite-branch instance: a chain of leftmost cells down to
// `chain_depth`, continued by `rule`.  The optimum is the branch limit.
TreeInstance adversarial_depth_instance(const SmoothnessProfile& profile,
                                        const CostToBiasModel& model,
                                        int chain_depth, BranchRule rule);

// Family of K^(s+1) instances sharing a widening trunk: single chain above
// depth h-s, full K-ary widening to width K^s at depth h, and one instance
// per choice of depth-(h+1) cell continuing leftmost below.  Requires
// K^s <= rho^(-d*h) so every member stays within the per-depth cell caps.
std::vector<TreeInstance> adversarial_width_family(
    const SmoothnessProfile& profile, const CostToBiasModel& model, int h,
    int s);

struct VerifyReport {
  bool pass = true;
  std::string reason;   // empty when pass
  int depth = -1;       // depth of the first violation, when applicable
  double count = 0.0;   // offending count
  double cap = 0.0;     // cap it exceeded
  std::string cell;     // offending cell index, when applicable

  std::string describe() const;
};

// Checks, symbolically from tree membership and exactly up to horizon H:
// the structural tree invariants, per-depth node counts within
// floor(rho^(-d*h)), near-optimal cell counts N_h(3*nu*rho^h) within
// C*rho^(-d*h), optimal-branch containment with the target within nu*rho^h
// of the optimum on branch cells, and the bias envelope on representatives.
VerifyReport verify_membership(const TreeInstance& instance, int horizon);

}  // namespace kometo
