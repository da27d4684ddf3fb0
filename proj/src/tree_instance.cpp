#include "kometo/tree_instance.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace kometo {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CellIndex ipow(int base, int exp) {
  CellIndex out = 1;
  for (int k = 0; k < exp; ++k) out *= base;
  return out;
}

}  // namespace

double SmoothnessProfile::d_max() const {
  return std::log(static_cast<double>(K)) / std::log(1.0 / rho);
}

double SmoothnessProfile::c_min() const {
  int e = static_cast<int>(std::floor(std::log(3.0) / std::log(1.0 / rho)));
  return std::pow(K * std::pow(rho, d), e);
}

void SmoothnessProfile::validate() const {
  if (!(nu > 0)) throw std::invalid_argument("profile needs nu > 0");
  if (!(rho > 0) || !(rho < 1))
    throw std::invalid_argument("profile needs rho in (0, 1)");
  if (K < 2) throw std::invalid_argument("profile needs K >= 2");
  if (!(d >= 0) || d > d_max() * (1 + 1e-12))
    throw std::invalid_argument("profile needs d in [0, log(K)/log(1/rho)]");
  if (C < c_min() * (1 - 1e-9))
    throw std::invalid_argument("profile C below the smallest admissible value");
}

std::string SmoothnessProfile::describe() const {
  std::ostringstream out;
  out << "nu=" << nu << ",rho=" << rho << ",d=" << d << ",C=" << C
      << ",K=" << K;
  return out.str();
}

int BranchRule::child_at(int depth, int arity) const {
  if (kind == Kind::kFixedChild) return child;
  return static_cast<int>(
      splitmix64(seed ^ (static_cast<std::uint64_t>(depth) *
                         0x9e3779b97f4a7c15ULL)) %
      static_cast<std::uint64_t>(arity));
}

TruncatedTree::TruncatedTree(int arity, std::vector<std::set<CellIndex>> levels,
                             CellIndex anchor, BranchRule rule,
                             int precompute_depth)
    : arity_(arity),
      levels_(std::move(levels)),
      anchor_(std::move(anchor)),
      rule_(rule) {
  if (arity_ < 2) throw std::invalid_argument("tree arity must be >= 2");
  if (levels_.empty()) throw std::invalid_argument("tree needs a root level");
  // Extend the branch eagerly so lookups during runs stay O(1); the walk
  // continues functionally past the precomputed range if ever needed.
  CellIndex idx = anchor_;
  branch_below_.reserve(
      std::max(0, precompute_depth - explicit_depth()));
  for (int h = explicit_depth() + 1; h <= precompute_depth; ++h) {
    idx = idx * arity_ + rule_.child_at(h, arity_);
    branch_below_.push_back(idx);
  }
}

bool TruncatedTree::contains(int depth, const CellIndex& index) const {
  if (depth < 0 || index < 0) return false;
  if (depth <= explicit_depth()) return levels_[depth].count(index) > 0;
  return branch_index(depth) == index;
}

std::size_t TruncatedTree::node_count(int depth) const {
  if (depth < 0) return 0;
  if (depth <= explicit_depth()) return levels_[depth].size();
  return 1;
}

std::vector<CellIndex> TruncatedTree::nodes_at(int depth) const {
  if (depth < 0) return {};
  if (depth <= explicit_depth())
    return {levels_[depth].begin(), levels_[depth].end()};
  return {branch_index(depth)};
}

CellIndex TruncatedTree::branch_index(int depth) const {
  if (depth < 0) throw std::invalid_argument("negative depth");
  if (depth <= explicit_depth()) {
    CellIndex idx = anchor_;
    for (int h = explicit_depth(); h > depth; --h) idx /= arity_;
    return idx;
  }
  int below = depth - explicit_depth();
  if (below <= static_cast<int>(branch_below_.size()))
    return branch_below_[below - 1];
  CellIndex idx =
      branch_below_.empty() ? anchor_ : branch_below_.back();
  for (int h = explicit_depth() + static_cast<int>(branch_below_.size()) + 1;
       h <= depth; ++h)
    idx = idx * arity_ + rule_.child_at(h, arity_);
  return idx;
}

bool TruncatedTree::on_branch(int depth, const CellIndex& index) const {
  return branch_index(depth) == index;
}

int TruncatedTree::children_in_tree(int depth, const CellIndex& index) const {
  int n = 0;
  for (int l = 0; l < arity_; ++l)
    if (contains(depth + 1, index * arity_ + l)) ++n;
  return n;
}

std::string TruncatedTree::structural_defect() const {
  if (levels_[0].size() != 1 || *levels_[0].begin() != 0)
    return "root level must hold exactly the root cell";
  for (int h = 0; h <= explicit_depth(); ++h) {
    if (levels_[h].empty()) {
      std::ostringstream out;
      out << "no cell at depth " << h;
      return out.str();
    }
    CellIndex cap = ipow(arity_, h);
    for (const CellIndex& i : levels_[h]) {
      if (i < 0 || i >= cap) {
        std::ostringstream out;
        out << "index " << i.str() << " out of range at depth " << h;
        return out.str();
      }
      if (h > 0 && levels_[h - 1].count(i / arity_) == 0) {
        std::ostringstream out;
        out << "cell (" << h << ", " << i.str() << ") lacks its parent";
        return out.str();
      }
    }
  }
  if (levels_.back().count(anchor_) == 0)
    return "branch anchor is not a deepest explicit cell";
  if (rule_.kind == BranchRule::Kind::kFixedChild &&
      (rule_.child < 0 || rule_.child >= arity_))
    return "branch rule child out of range";
  return "";
}

TreeInstance::TreeInstance(SmoothnessProfile profile, CostToBiasModel model,
                           TruncatedTree tree, Box domain, std::string name)
    : profile_(profile),
      model_(model),
      tree_(std::make_shared<const TruncatedTree>(std::move(tree))),
      domain_(std::move(domain)),
      name_(std::move(name)) {
  profile_.validate();
  kometo::validate(model_);
  if (profile_.K != tree_->arity())
    throw std::invalid_argument("profile arity disagrees with tree arity");
  if (domain_.dim() == 0) throw std::invalid_argument("empty domain");
}

int TreeInstance::containment_depth(const Point& x) const {
  if (!domain_.contains(x)) throw std::domain_error("point outside domain");
  const int K = tree_->arity();
  Box b = domain_;
  CellIndex idx = 0;
  int h = 0;
  for (;;) {
    // Once nu*rho^h underflows, every deeper slice is indistinguishable
    // from the optimum in double precision; report "infinitely deep".
    if (profile_.nu * std::pow(profile_.rho, h) == 0.0) return -1;
    int axis = h % static_cast<int>(b.dim());
    int slot = child_slot(b.dims[axis], K, x[axis]);
    b.dims[axis] = split_interval(b.dims[axis], K)[slot];
    idx = idx * K + slot;
    if (!tree_->contains(h + 1, idx)) return h;
    ++h;
  }
}

double TreeInstance::target(const Point& x) const {
  int h = containment_depth(x);
  if (h < 0) return 0.0;
  return -profile_.nu * std::pow(profile_.rho, h);
}

double TreeInstance::fidelity(const Point& x, double cost) const {
  return std::min(target(x), -phi(model_, cost));
}

MultiFidelityFunction TreeInstance::function() const {
  MultiFidelityFunction fn;
  fn.domain = domain_;
  fn.sup_value = 0.0;
  TreeInstance self = *this;  // shares the tree
  fn.target = [self](const Point& x) { return self.target(x); };
  fn.fidelity = [self](const Point& x, double cost) {
    return self.fidelity(x, cost);
  };
  return fn;
}

FidelitySchedule TreeInstance::schedule() const {
  FidelitySchedule s;
  if (const Cutoff* c = std::get_if<Cutoff>(&model_))
    s.top_cost = std::max(c->a, 1.0);
  return s;
}

Environment TreeInstance::environment(double budget) const {
  return Environment(function(), schedule(), budget);
}

std::string TreeInstance::to_json() const {
  nlohmann::json j;
  j["name"] = name_;
  j["profile"] = {{"nu", profile_.nu}, {"rho", profile_.rho},
                  {"d", profile_.d},   {"C", profile_.C},
                  {"K", profile_.K}};
  j["model"] = nlohmann::json::parse(model_to_json(model_));
  nlohmann::json dom = nlohmann::json::array();
  for (const auto& iv : domain_.dims) dom.push_back({iv.lo, iv.hi});
  j["domain"] = dom;
  nlohmann::json nodes = nlohmann::json::array();
  for (int h = 0; h <= tree_->explicit_depth(); ++h)
    for (const CellIndex& i : tree_->levels()[h])
      nodes.push_back({h, i.str()});
  j["nodes"] = nodes;
  j["anchor"] = tree_->anchor().str();
  if (tree_->rule().kind == BranchRule::Kind::kFixedChild)
    j["rule"] = {{"kind", "fixed"}, {"child", tree_->rule().child}};
  else
    j["rule"] = {{"kind", "seeded"}, {"seed", tree_->rule().seed}};
  return j.dump(2);
}

TreeInstance TreeInstance::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::string k = it.key();
    if (k != "name" && k != "profile" && k != "model" && k != "domain" &&
        k != "nodes" && k != "anchor" && k != "rule")
      throw std::invalid_argument("unknown instance key: " + k);
  }
  SmoothnessProfile profile;
  const auto& pj = j.at("profile");
  profile.nu = pj.at("nu").get<double>();
  profile.rho = pj.at("rho").get<double>();
  profile.d = pj.at("d").get<double>();
  profile.C = pj.at("C").get<double>();
  profile.K = pj.at("K").get<int>();
  CostToBiasModel model = model_from_json(j.at("model").dump());
  Box domain;
  for (const auto& iv : j.at("domain"))
    domain.dims.push_back(Interval{iv.at(0).get<double>(),
                                   iv.at(1).get<double>()});
  int max_depth = 0;
  for (const auto& node : j.at("nodes"))
    max_depth = std::max(max_depth, node.at(0).get<int>());
  std::vector<std::set<CellIndex>> levels(max_depth + 1);
  for (const auto& node : j.at("nodes"))
    levels[node.at(0).get<int>()].insert(
        CellIndex(node.at(1).get<std::string>()));
  CellIndex anchor(j.at("anchor").get<std::string>());
  BranchRule rule;
  const auto& rj = j.at("rule");
  if (rj.at("kind") == "fixed")
    rule = BranchRule::fixed(rj.at("child").get<int>());
  else if (rj.at("kind") == "seeded")
    rule = BranchRule::seeded(rj.at("seed").get<std::uint64_t>());
  else
    throw std::invalid_argument("unknown branch rule kind");
  TruncatedTree tree(profile.K, std::move(levels), std::move(anchor), rule);
  return TreeInstance(profile, model, std::move(tree), std::move(domain),
                      j.value("name", std::string("instance")));
}

TreeInstance adversarial_depth_instance(const SmoothnessProfile& profile,
                                        const CostToBiasModel& model,
                                        int chain_depth, BranchRule rule) {
  if (chain_depth < 0) throw std::invalid_argument("negative chain depth");
  std::vector<std::set<CellIndex>> levels(chain_depth + 1);
  for (auto& lvl : levels) lvl.insert(0);
  TruncatedTree tree(profile.K, std::move(levels), 0, rule);
  std::ostringstream name;
  name << "depth_limited(h=" << chain_depth << ","
       << (rule.kind == BranchRule::Kind::kFixedChild
               ? "child=" + std::to_string(rule.child)
               : "seed=" + std::to_string(rule.seed))
      << ")";
  return TreeInstance(profile, model, std::move(tree), Box::unit(1),
                      name.str());
}

std::vector<TreeInstance> adversarial_width_family(
    const SmoothnessProfile& profile, const CostToBiasModel& model, int h,
    int s) {
  if (h < 0 || s < 0 || s > h)
    throw std::invalid_argument("width family needs 0 <= s <= h");
  const int K = profile.K;
  double width_cap = std::pow(1.0 / profile.rho, profile.d * h);
  if (std::pow(static_cast<double>(K), s) > width_cap * (1 + 1e-9))
    throw std::invalid_argument(
        "width family infeasible: K^s exceeds rho^(-d*h)");
  // Shared trunk: single chain above depth h-s, then full K-ary widening.
  std::vector<std::set<CellIndex>> trunk(h + 2);
  for (int depth = 0; depth < h - s; ++depth) trunk[depth].insert(0);
  for (int depth = h - s; depth <= h; ++depth) {
    CellIndex width = ipow(K, depth - (h - s));
    for (CellIndex i = 0; i < width; ++i) trunk[depth].insert(i);
  }
  std::vector<TreeInstance> family;
  CellIndex members = ipow(K, s + 1);
  for (CellIndex i = 0; i < members; ++i) {
    auto levels = trunk;
    levels[h + 1].insert(i);
    TruncatedTree tree(K, std::move(levels), i, BranchRule::fixed(0));
    std::ostringstream name;
    name << "width_family(h=" << h << ",s=" << s << ",i=" << i.str() << ")";
    family.emplace_back(profile, model, std::move(tree), Box::unit(1),
                        name.str());
  }
  return family;
}

std::string VerifyReport::describe() const {
  if (pass) return "pass";
  std::ostringstream out;
  out << "fail: " << reason;
  if (depth >= 0) out << " at depth " << depth;
  if (!cell.empty()) out << ", cell " << cell;
  if (cap > 0) out << " (count " << count << " > cap " << cap << ")";
  return out.str();
}

VerifyReport verify_membership(const TreeInstance& instance, int horizon) {
  VerifyReport r;
  auto fail = [&r](std::string reason, int depth = -1, double count = 0,
                   double cap = 0, std::string cell = "") {
    r.pass = false;
    r.reason = std::move(reason);
    r.depth = depth;
    r.count = count;
    r.cap = cap;
    r.cell = std::move(cell);
    return r;
  };

  const SmoothnessProfile& p = instance.profile();
  try {
    p.validate();
    validate(instance.model());
  } catch (const std::exception& e) {
    return fail(e.what());
  }
  const TruncatedTree& tree = instance.tree();
  if (std::string defect = tree.structural_defect(); !defect.empty())
    return fail(defect);

  PartitionTree geometry(instance.domain(), p.K);
  const double inv_rho = 1.0 / p.rho;

  for (int h = 0; h <= horizon; ++h) {
    double gap = p.nu * std::pow(p.rho, h);

    // per-depth node count within the tree-shape cap
    double node_cap = std::floor(std::pow(inv_rho, p.d * h));
    double nodes = static_cast<double>(tree.node_count(h));
    if (nodes > node_cap * (1 + 1e-9))
      return fail("per-depth cell count exceeds rho^(-d*h)", h, nodes,
                  node_cap);

    // the optimal branch stays in the tree and its cell stays near-optimal
    CellIndex branch = tree.branch_index(h);
    if (!tree.contains(h, branch))
      return fail("optimal branch leaves the tree", h, 0, 0, branch.str());
    Cell bcell = geometry.cell(CellKey{h, branch});
    double fb = instance.target(bcell.representative());
    if (fb < -gap * (1 + 1e-9))
      return fail("branch cell representative falls below -nu*rho^h", h, fb,
                  gap, branch.str());

    // N_h(3*nu*rho^h) <= C*rho^(-d*h), counted symbolically: every in-tree
    // cell at depth h qualifies, and an out-of-tree cell qualifies exactly
    // when its deepest in-tree ancestor at depth h'' has nu*rho^h'' within
    // the 3*nu*rho^h window.
    double near = nodes;
    int window = static_cast<int>(
        std::floor(std::log(3.0) / std::log(inv_rho) * (1 + 1e-12)));
    for (int hpp = std::max(0, h - window); hpp < h; ++hpp) {
      if (std::pow(inv_rho, h - hpp) > 3.0 * (1 + 1e-12)) continue;
      double exits = 0;
      for (const CellIndex& node : tree.nodes_at(hpp))
        exits += p.K - tree.children_in_tree(hpp, node);
      near += exits * std::pow(static_cast<double>(p.K), h - hpp - 1);
    }
    double near_cap = p.C * std::pow(inv_rho, p.d * h);
    if (near > near_cap * (1 + 1e-9))
      return fail("near-optimal cell count exceeds C*rho^(-d*h)", h, near,
                  near_cap);

    // bias envelope on in-tree representatives across a cost ladder
    for (const CellIndex& node : tree.nodes_at(h)) {
      Cell cell = geometry.cell(CellKey{h, node});
      Point rep = cell.representative();
      double f = instance.target(rep);
      for (double cost : {1.0, std::exp(1.0), std::exp(2.0), std::exp(4.0)}) {
        double bias_cap = phi(instance.model(), cost);
        double observed = instance.fidelity(rep, cost);
        if (std::abs(f - observed) > bias_cap * (1 + 1e-12) + 1e-12)
          return fail("bias envelope violated on a representative", h,
                      std::abs(f - observed), bias_cap, node.str());
      }
    }
  }
  return r;
}

}  // namespace kometo
