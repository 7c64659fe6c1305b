#include "ptree/replicate.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>

namespace ptree {

CjsConstraint parse_cjs_constraint(const std::string& s) {
  if (s == "constant") return CjsConstraint::Constant;
  if (s == "age") return CjsConstraint::Age;
  if (s == "time") return CjsConstraint::Time;
  if (s == "unconstrained") return CjsConstraint::Unconstrained;
  throw std::invalid_argument("unknown constraint mode '" + s + "'");
}

const char* cjs_constraint_name(CjsConstraint c) {
  switch (c) {
    case CjsConstraint::Constant: return "constant";
    case CjsConstraint::Age: return "age";
    case CjsConstraint::Time: return "time";
    case CjsConstraint::Unconstrained: return "unconstrained";
  }
  return "?";
}

TieMap::TieMap(std::vector<std::shared_ptr<const PartitionTree>> forest) : forest_(std::move(forest)) {
  int total = 0;
  for (const auto& t : forest_) {
    offsets_.push_back(total);
    total += t->size();
  }
  parent_.resize(total);
  for (int i = 0; i < total; ++i) parent_[i] = i;
  rebuild();
}

int TieMap::find(int x) const {
  while (parent_[x] != x) x = parent_[x];
  return x;
}

void TieMap::tie(NodeRef a, NodeRef b) {
  const PartitionTree& ta = *forest_.at(a.tree);
  const PartitionTree& tb = *forest_.at(b.tree);
  if (ta.is_leaf(a.node) || tb.is_leaf(b.node)) throw std::invalid_argument("cannot tie a leaf");
  if (ta.arity(a.node) != tb.arity(b.node)) throw std::invalid_argument("tied nodes must have equal arity");
  if (ta.node(a.node).axis != tb.node(b.node).axis)
    throw std::invalid_argument("tied nodes must split along the same axis");
  int ra = find(flat(a)), rb = find(flat(b));
  if (ra == rb) return;
  if (rb < ra) std::swap(ra, rb);
  parent_[rb] = ra;
  rebuild();
}

void TieMap::rebuild() {
  class_index_.assign(parent_.size(), -1);
  members_.clear();
  std::map<int, int> root_to_class;
  for (int t = 0; t < static_cast<int>(forest_.size()); ++t) {
    for (int id = 0; id < forest_[t]->size(); ++id) {
      if (forest_[t]->is_leaf(id)) continue;
      int f = flat({t, id});
      int r = find(f);
      auto it = root_to_class.find(r);
      if (it == root_to_class.end()) {
        it = root_to_class.emplace(r, static_cast<int>(members_.size())).first;
        members_.emplace_back();
      }
      class_index_[f] = it->second;
      members_[it->second].push_back({t, id});
    }
  }
}

int TieMap::class_of(NodeRef r) const { return class_index_.at(flat(r)); }

int TieMap::arity(int cls) const {
  NodeRef r = representative(cls);
  return forest_[r.tree]->arity(r.node);
}

void TieMap::validate() const {
  std::vector<int> seen(parent_.size(), 0);
  for (int c = 0; c < class_count(); ++c) {
    if (members_[c].empty()) throw std::logic_error("empty tie class");
    int a = arity(c);
    SplitAxis axis = forest_[representative(c).tree]->node(representative(c).node).axis;
    for (NodeRef r : members_[c]) {
      if (forest_[r.tree]->arity(r.node) != a) throw std::logic_error("arity mismatch within tie class");
      if (forest_[r.tree]->node(r.node).axis != axis) throw std::logic_error("split axis mismatch within tie class");
      ++seen[flat(r)];
    }
  }
  for (int t = 0; t < static_cast<int>(forest_.size()); ++t)
    for (int id = 0; id < forest_[t]->size(); ++id) {
      int expect = forest_[t]->is_leaf(id) ? 0 : 1;
      if (seen[flat({t, id})] != expect) throw std::logic_error("tie classes do not partition the internal nodes");
    }
}

namespace {
// Ties every internal node to the first node seen with the same key.
template <typename KeyFn>
void tie_by_key(TieMap& tie, KeyFn key) {
  std::map<long long, NodeRef> first;
  for (int t = 0; t < static_cast<int>(tie.forest().size()); ++t) {
    const PartitionTree& tree = tie.tree(t);
    for (int id : tree.internal_nodes()) {
      auto k = key(t, id);
      if (!k) continue;
      auto [it, inserted] = first.emplace(*k, NodeRef{t, id});
      if (!inserted) tie.tie(it->second, {t, id});
    }
  }
}
}  // namespace

TieMap cjs_tie_map(const SamplingGrid& grid, CjsConstraint mode) {
  std::vector<std::shared_ptr<const PartitionTree>> forest;
  for (int k = 1; k <= grid.occasions(); ++k) forest.push_back(std::make_shared<PartitionTree>(build_flp(grid, k)));
  TieMap tie(std::move(forest));
  tie_by_key(tie, [&](int t, int id) -> std::optional<long long> {
    int k = t + 1;
    int j = tie.tree(t).node(id).step + 1;
    switch (mode) {
      case CjsConstraint::Constant: return 0;
      case CjsConstraint::Age: return j;
      case CjsConstraint::Time: return k + j - 1;
      case CjsConstraint::Unconstrained: return std::nullopt;
    }
    return std::nullopt;
  });
  tie.validate();
  return tie;
}

TieMap cjs_tie_map(int K, CjsConstraint mode) { return cjs_tie_map(SamplingGrid::regular(K), mode); }

TieMap eebp_exit_tie_map(const SamplingGrid& grid, bool available_only) {
  TieMap tie({std::make_shared<PartitionTree>(build_eebp(grid, available_only))});
  tie_by_key(tie, [&](int, int id) -> std::optional<long long> {
    const Node& n = tie.tree(0).node(id);
    if (n.axis != SplitAxis::Exit) return std::nullopt;
    return n.step;
  });
  tie.validate();
  return tie;
}

TieMap eebp_slice_tie_map(const SamplingGrid& grid) {
  std::vector<std::shared_ptr<const PartitionTree>> forest;
  for (int k = 1; k <= grid.occasions(); ++k)
    forest.push_back(std::make_shared<PartitionTree>(build_eebp_slice(grid, k)));
  TieMap tie(std::move(forest));
  const int K = grid.occasions();
  tie_by_key(tie, [&](int t, int id) -> std::optional<long long> {
    const Node& n = tie.tree(t).node(id);
    // Entry split at step s decides entry interval s; exit split at step s decides exit interval K - s.
    if (n.axis == SplitAxis::Entry) return n.step;
    return 1000 + (K - n.step);
  });
  tie.validate();
  return tie;
}

TieMap rr_slice_tie_map(int K, int U) {
  if (K < 1) throw std::invalid_argument("need at least one slice");
  auto tree = std::make_shared<PartitionTree>(build_rr_partition(U));
  std::vector<std::shared_ptr<const PartitionTree>> forest(K, tree);
  TieMap tie(std::move(forest));
  tie_by_key(tie, [](int, int id) -> std::optional<long long> { return id; });
  tie.validate();
  return tie;
}

std::vector<std::vector<std::int64_t>> pooled_counts(
    const TieMap& tie, const std::vector<std::vector<std::vector<std::int64_t>>>& per_tree_node_counts) {
  std::vector<std::vector<std::int64_t>> out(tie.class_count());
  for (int c = 0; c < tie.class_count(); ++c) {
    out[c].assign(tie.arity(c), 0);
    for (NodeRef r : tie.members(c)) {
      const auto& v = per_tree_node_counts.at(r.tree).at(r.node);
      if (static_cast<int>(v.size()) != tie.arity(c)) throw std::invalid_argument("count arity mismatch in tie class");
      for (std::size_t j = 0; j < v.size(); ++j) out[c][j] += v[j];
    }
  }
  return out;
}

std::vector<std::vector<std::vector<double>>> broadcast_splits(const TieMap& tie,
                                                               const std::vector<std::vector<double>>& class_values) {
  std::vector<std::vector<std::vector<double>>> out(tie.forest().size());
  for (std::size_t t = 0; t < out.size(); ++t) out[t].resize(tie.tree(static_cast<int>(t)).size());
  for (int c = 0; c < tie.class_count(); ++c)
    for (NodeRef r : tie.members(c)) out[r.tree][r.node] = class_values.at(c);
  return out;
}

}  // namespace ptree
