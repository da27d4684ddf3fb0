#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace kometo {

using Point = std::vector<double>;
using CellIndex = boost::multiprecision::cpp_int;

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

// Axis-aligned box, the search domain and the shape of every cell.
struct Box {
  std::vector<Interval> dims;

  std::size_t dim() const { return dims.size(); }
  bool contains(const Point& x) const;
  Point midpoint() const;

  static Box unit(std::size_t d);
};

// Identity of a cell: depth h and index i in [0, K^h).  Children of (h, i)
// are (h+1, K*i + l) for l in [0, K).  Indices outgrow 64 bits at the depths
// deep runs reach, hence the big integer.
struct CellKey {
  int depth = 0;
  CellIndex index = 0;

  friend bool operator==(const CellKey& a, const CellKey& b) {
    return a.depth == b.depth && a.index == b.index;
  }
  friend bool operator<(const CellKey& a, const CellKey& b) {
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.index < b.index;
  }
};

struct Cell {
  CellKey key;
  Box bounds;

  Point representative() const { return bounds.midpoint(); }
};

// Book-keeping attached to a materialized cell: which fidelity levels are
// requestable (flag set when the parent is opened), which level values have
// actually been observed, and the level this cell itself was opened at.
struct CellRecord {
  Cell cell;
  std::vector<bool> requestable;        // indexed by fidelity level j
  std::map<int, double> values;         // level j -> observed value
  std::optional<int> opened_level;

  bool is_requestable(int level) const {
    return level >= 0 && level < static_cast<int>(requestable.size()) &&
           requestable[level];
  }
};

// K-ary hierarchical partition of a box domain.  Cells split along the
// dimension cycling with depth (depth h splits axis h mod dim) into K equal
// slabs.  Cells materialize lazily, keyed by (depth, index); the root always
// exists.
class PartitionTree {
 public:
  PartitionTree(Box domain, int arity);

  int arity() const { return arity_; }
  const Box& domain() const { return domain_; }

  const Cell& root() const;

  // Bounds of an arbitrary cell, derived from the root by replaying the
  // index's base-K digits.  Works for cells that were never materialized.
  Cell cell(const CellKey& key) const;

  // The K children of a cell, materializing their records.
  std::vector<CellKey> split(const CellKey& key);

  // Deterministic point location: the depth-h cell whose closed bounds
  // contain x, boundary ties resolved toward the lower index.
  Cell cell_containing(const Point& x, int depth) const;

  // Record access.  ensure() materializes, record() requires materialized.
  CellRecord& ensure(const CellKey& key);
  const CellRecord* find(const CellKey& key) const;
  CellRecord& record(const CellKey& key);

  void mark_requestable(const CellKey& key, int level);
  std::optional<double> value(const CellKey& key, int level) const;
  void store_value(const CellKey& key, int level, double v);

  const std::map<CellKey, CellRecord>& records() const { return records_; }

  // Cells at a given depth that have been materialized, in index order.
  std::vector<CellKey> materialized_at(int depth) const;

  // Number of materialized cells at a depth, O(1).
  std::size_t materialized_count(int depth) const;

  // Bumped whenever any flag at the depth changes; lets callers cache
  // per-depth candidate rankings and detect staleness cheaply.
  std::uint64_t flag_revision(int depth) const;

  // Axis a depth-h cell splits along when opened.
  int split_axis(int depth) const {
    return depth % static_cast<int>(domain_.dim());
  }

 private:
  Box domain_;
  int arity_;
  std::map<CellKey, CellRecord> records_;
  std::vector<std::size_t> depth_counts_;
  std::vector<std::uint64_t> flag_revisions_;

  std::vector<Interval> child_slabs(const Interval& iv) const;
  void note_created(int depth);
};

// K equal slabs of an interval, cut points shared exactly between
// neighbours.
std::vector<Interval> split_interval(const Interval& iv, int arity);

// Slab index of x under a K-way split, boundary ties toward the lower slab.
int child_slot(const Interval& iv, int arity, double x);

// Parent key; depth 0 has no parent.
CellKey parent_of(const CellKey& key, int arity);

// True when the child occupies the middle slab of an odd-arity split, the
// one case where the child's midpoint representative coincides with the
// parent's and an observed parent value can stand in for the child's.
bool inherits_representative(int arity, int child_slot);

}  // namespace kometo
