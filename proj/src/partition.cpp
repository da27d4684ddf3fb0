#include "kometo/partition.hpp"

#include <stdexcept>

namespace kometo {

bool Box::contains(const Point& x) const {
  if (x.size() != dims.size()) return false;
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (!dims[k].contains(x[k])) return false;
  return true;
}

Point Box::midpoint() const {
  Point m(dims.size());
  for (std::size_t k = 0; k < dims.size(); ++k) m[k] = dims[k].mid();
  return m;
}

Box Box::unit(std::size_t d) {
  Box b;
  b.dims.assign(d, Interval{0.0, 1.0});
  return b;
}

PartitionTree::PartitionTree(Box domain, int arity)
    : domain_(std::move(domain)), arity_(arity) {
  if (arity_ < 2) throw std::invalid_argument("partition arity must be >= 2");
  if (domain_.dim() == 0) throw std::invalid_argument("empty domain");
  for (const auto& iv : domain_.dims)
    if (!(iv.lo < iv.hi)) throw std::invalid_argument("degenerate domain interval");
  CellRecord root;
  root.cell = Cell{CellKey{0, 0}, domain_};
  records_.emplace(root.cell.key, std::move(root));
  note_created(0);
}

void PartitionTree::note_created(int depth) {
  if (static_cast<int>(depth_counts_.size()) <= depth)
    depth_counts_.resize(depth + 1, 0);
  ++depth_counts_[depth];
}

std::size_t PartitionTree::materialized_count(int depth) const {
  if (depth < 0 || depth >= static_cast<int>(depth_counts_.size())) return 0;
  return depth_counts_[depth];
}

std::uint64_t PartitionTree::flag_revision(int depth) const {
  if (depth < 0 || depth >= static_cast<int>(flag_revisions_.size())) return 0;
  return flag_revisions_[depth];
}

const Cell& PartitionTree::root() const {
  return records_.at(CellKey{0, 0}).cell;
}

std::vector<Interval> split_interval(const Interval& iv, int arity) {
  // Cut points shared exactly between neighbours so the slabs tile the
  // parent without gap or overlap.
  std::vector<double> cuts(arity + 1);
  cuts[0] = iv.lo;
  cuts[arity] = iv.hi;
  for (int l = 1; l < arity; ++l)
    cuts[l] = iv.lo + iv.width() * static_cast<double>(l) / arity;
  std::vector<Interval> out(arity);
  for (int l = 0; l < arity; ++l) out[l] = Interval{cuts[l], cuts[l + 1]};
  return out;
}

int child_slot(const Interval& iv, int arity, double x) {
  auto slabs = split_interval(iv, arity);
  for (int l = 0; l < arity; ++l)
    if (x <= slabs[l].hi) return l;  // boundary ties go to the lower slab
  return arity - 1;
}

std::vector<Interval> PartitionTree::child_slabs(const Interval& iv) const {
  return split_interval(iv, arity_);
}

Cell PartitionTree::cell(const CellKey& key) const {
  if (key.depth < 0 || key.index < 0)
    throw std::invalid_argument("bad cell key");
  if (auto it = records_.find(key); it != records_.end()) return it->second.cell;
  // Recover the child slot at each depth from the base-K digits of the index.
  std::vector<int> slots(key.depth);
  CellIndex i = key.index;
  for (int h = key.depth; h-- > 0;) {
    slots[h] = static_cast<int>(i % arity_);
    i /= arity_;
  }
  if (i != 0) throw std::invalid_argument("cell index out of range for depth");
  Box b = domain_;
  for (int h = 0; h < key.depth; ++h) {
    int axis = split_axis(h);
    b.dims[axis] = child_slabs(b.dims[axis])[slots[h]];
  }
  return Cell{key, std::move(b)};
}

std::vector<CellKey> PartitionTree::split(const CellKey& key) {
  CellRecord& parent = ensure(key);
  int axis = split_axis(key.depth);
  auto slabs = child_slabs(parent.cell.bounds.dims[axis]);
  std::vector<CellKey> children;
  children.reserve(arity_);
  for (int l = 0; l < arity_; ++l) {
    CellKey ck{key.depth + 1, key.index * arity_ + l};
    if (records_.find(ck) == records_.end()) {
      CellRecord rec;
      rec.cell.key = ck;
      rec.cell.bounds = parent.cell.bounds;
      rec.cell.bounds.dims[axis] = slabs[l];
      records_.emplace(ck, std::move(rec));
      note_created(ck.depth);
    }
    children.push_back(ck);
  }
  return children;
}

Cell PartitionTree::cell_containing(const Point& x, int depth) const {
  if (!domain_.contains(x)) throw std::domain_error("point outside domain");
  if (depth < 0) throw std::invalid_argument("negative depth");
  Box b = domain_;
  CellIndex index = 0;
  for (int h = 0; h < depth; ++h) {
    int axis = split_axis(h);
    int slot = child_slot(b.dims[axis], arity_, x[axis]);
    b.dims[axis] = split_interval(b.dims[axis], arity_)[slot];
    index = index * arity_ + slot;
  }
  return Cell{CellKey{depth, index}, std::move(b)};
}

CellRecord& PartitionTree::ensure(const CellKey& key) {
  if (auto it = records_.find(key); it != records_.end()) return it->second;
  CellRecord rec;
  rec.cell = cell(key);
  note_created(key.depth);
  return records_.emplace(key, std::move(rec)).first->second;
}

const CellRecord* PartitionTree::find(const CellKey& key) const {
  auto it = records_.find(key);
  return it == records_.end() ? nullptr : &it->second;
}

CellRecord& PartitionTree::record(const CellKey& key) {
  auto it = records_.find(key);
  if (it == records_.end()) throw std::logic_error("cell not materialized");
  return it->second;
}

void PartitionTree::mark_requestable(const CellKey& key, int level) {
  if (level < 0) throw std::invalid_argument("negative fidelity level");
  CellRecord& rec = ensure(key);
  if (static_cast<int>(rec.requestable.size()) <= level)
    rec.requestable.resize(level + 1, false);
  if (!rec.requestable[level]) {
    rec.requestable[level] = true;
    if (static_cast<int>(flag_revisions_.size()) <= key.depth)
      flag_revisions_.resize(key.depth + 1, 0);
    ++flag_revisions_[key.depth];
  }
}

std::optional<double> PartitionTree::value(const CellKey& key, int level) const {
  const CellRecord* rec = find(key);
  if (!rec) return std::nullopt;
  auto it = rec->values.find(level);
  if (it == rec->values.end()) return std::nullopt;
  return it->second;
}

void PartitionTree::store_value(const CellKey& key, int level, double v) {
  record(key).values[level] = v;
}

std::vector<CellKey> PartitionTree::materialized_at(int depth) const {
  std::vector<CellKey> out;
  auto it = records_.lower_bound(CellKey{depth, 0});
  for (; it != records_.end() && it->first.depth == depth; ++it)
    out.push_back(it->first);
  return out;
}

CellKey parent_of(const CellKey& key, int arity) {
  if (key.depth == 0) throw std::invalid_argument("root has no parent");
  return CellKey{key.depth - 1, key.index / arity};
}

bool inherits_representative(int arity, int child_slot) {
  return (arity % 2 == 1) && child_slot == arity / 2;
}

}  // namespace kometo
