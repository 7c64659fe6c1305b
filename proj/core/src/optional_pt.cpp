#include "ptree/optional_pt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ptree/special.hpp"

namespace ptree {

StopState StopState::none(const PartitionTree& tree, double rho, int min_depth) {
  StopState st;
  st.rho = rho;
  st.min_depth = min_depth;
  st.s.assign(tree.size(), 0);
  for (int leaf : tree.leaves()) st.s[leaf] = 1;
  return st;
}

void StopState::validate(const PartitionTree& tree) const {
  if (static_cast<int>(s.size()) != tree.size()) throw std::invalid_argument("stop vector size mismatch");
  if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("rho must be in [0, 1]");
  for (int id = 0; id < tree.size(); ++id) {
    if (tree.is_leaf(id) && s[id] != 1) throw std::logic_error("leaves must be stopped");
    if (!tree.is_leaf(id) && s[id] && !can_stop(tree, id)) throw std::logic_error("node above minimum depth stopped");
  }
}

int stopped_ancestor(const PartitionTree& tree, const StopState& stop, int id) {
  int found = -1;
  for (int a = id; a >= 0; a = tree.node(a).parent)
    if (stop.s[a]) found = a;
  return found;
}

bool active(const PartitionTree& tree, const StopState& stop, int id) {
  for (int a = id; a >= 0; a = tree.node(a).parent)
    if (stop.s[a]) return false;
  return true;
}

namespace {
double density_at_leaf(const PartitionTree& tree, const StopState& stop, const SplitProbs& splits,
                       const TreeIndex& path) {
  double mass = 1.0;
  int id = 0;
  for (int c : path) {
    if (stop.s[id]) break;
    mass *= splits.v[id][c];
    id = tree.node(id).children[c];
  }
  return mass / tree.cell_area(id);
}
}  // namespace

double opt_density(const PartitionTree& tree, const StopState& stop, const SplitProbs& splits, double x) {
  return density_at_leaf(tree, stop, splits, cell_of(tree, x));
}

double opt_density(const PartitionTree& tree, const StopState& stop, const SplitProbs& splits, double entry,
                   double exit) {
  return density_at_leaf(tree, stop, splits, cell_of(tree, entry, exit));
}

std::vector<double> opt_leaf_masses(const PartitionTree& tree, const StopState& stop, const SplitProbs& splits) {
  std::vector<double> node_mass(tree.size(), 0.0);
  std::vector<int> stop_at(tree.size(), -1);
  node_mass[0] = 1.0;
  std::vector<double> out(tree.leaf_count(), 0.0);
  for (int id = 0; id < tree.size(); ++id) {
    const Node& n = tree.node(id);
    if (n.parent >= 0) {
      int p = n.parent;
      stop_at[id] = stop_at[p];
      if (stop_at[id] < 0) {
        int pos = static_cast<int>(std::find(tree.node(p).children.begin(), tree.node(p).children.end(), id) -
                                   tree.node(p).children.begin());
        node_mass[id] = node_mass[p] * splits.v[p][pos];
      }
    }
    if (stop_at[id] < 0 && stop.s[id]) stop_at[id] = id;
    if (n.children.empty()) {
      int a = stop_at[id];
      // a == id for unstopped paths; skip the area ratio so tail cells (infinite area) stay finite.
      out[n.leaf_index] = a == id ? node_mass[a] : node_mass[a] * tree.cell_area(id) / tree.cell_area(a);
    }
  }
  return out;
}

double uniform_conditional_loglik(const PartitionTree& tree, int id, const std::vector<std::int64_t>& leaf_counts) {
  double area = tree.cell_area(id);
  double out = 0.0;
  std::vector<int> stack{id};
  while (!stack.empty()) {
    int a = stack.back();
    stack.pop_back();
    const Node& n = tree.node(a);
    if (n.children.empty()) {
      auto c = leaf_counts[n.leaf_index];
      if (c > 0) out += static_cast<double>(c) * std::log(tree.cell_area(a) / area);
    }
    for (int ch : n.children) stack.push_back(ch);
  }
  return out;
}

double subtree_conditional_loglik(const PartitionTree& tree, const StopState& stop, const SplitProbs& splits, int id,
                                  const std::vector<std::int64_t>& leaf_counts) {
  // Walk below id ignoring id's own stop flag; stop at the first stopped descendant.
  double out = 0.0;
  struct Item {
    int node;
    double logmass;
  };
  std::vector<Item> stack;
  const Node& root = tree.node(id);
  for (std::size_t j = 0; j < root.children.size(); ++j)
    stack.push_back({root.children[j], std::log(splits.v[id][j])});
  while (!stack.empty()) {
    Item it = stack.back();
    stack.pop_back();
    const Node& n = tree.node(it.node);
    if (stop.s[it.node]) {
      // Uniform on this cell: each leaf below gets its area share.
      double area = tree.cell_area(it.node);
      std::vector<int> inner{it.node};
      while (!inner.empty()) {
        int a = inner.back();
        inner.pop_back();
        const Node& m = tree.node(a);
        if (m.children.empty()) {
          auto c = leaf_counts[m.leaf_index];
          if (c > 0) out += static_cast<double>(c) * (it.logmass + std::log(tree.cell_area(a) / area));
        }
        for (int ch : m.children) inner.push_back(ch);
      }
      continue;
    }
    for (std::size_t j = 0; j < n.children.size(); ++j)
      stack.push_back({n.children[j], it.logmass + std::log(splits.v[it.node][j])});
  }
  return out;
}

std::uint8_t update_stop_indicator(const PartitionTree& tree, int id, StopState& stop, const SplitProbs& splits,
                                   const std::vector<std::int64_t>& leaf_counts, Rng& rng,
                                   std::vector<std::uint8_t>* refreshed) {
  if (tree.is_leaf(id)) return stop.s[id] = 1;
  if (refreshed) {
    for (int ch : tree.node(id).children)
      if (!tree.is_leaf(ch) && stop.can_stop(tree, ch) && !(*refreshed)[ch])
        throw std::logic_error("stop indicators must be refreshed children-first");
    (*refreshed)[id] = 1;
  }
  if (!stop.can_stop(tree, id)) return stop.s[id] = 0;
  if (stop.rho <= 0.0) return stop.s[id] = 0;
  if (stop.rho >= 1.0) return stop.s[id] = 1;
  // Below a stopped ancestor the indicator has no effect on the data.
  int parent = tree.node(id).parent;
  if (parent >= 0 && stopped_ancestor(tree, stop, parent) >= 0) return stop.s[id] = rng.uniform() < stop.rho ? 1 : 0;
  double a = std::log(stop.rho) + uniform_conditional_loglik(tree, id, leaf_counts);
  double b = std::log1p(-stop.rho) + subtree_conditional_loglik(tree, stop, splits, id, leaf_counts);
  double p1 = inv_logit(a - b);
  stop.s[id] = rng.uniform() < p1 ? 1 : 0;
  return stop.s[id];
}

void update_stop_indicators(const PartitionTree& tree, StopState& stop, const SplitProbs& splits,
                            const std::vector<std::int64_t>& leaf_counts, Rng& rng) {
  std::vector<std::uint8_t> refreshed(tree.size(), 0);
  for (int id : tree.internal_nodes_bottom_up()) update_stop_indicator(tree, id, stop, splits, leaf_counts, rng, &refreshed);
}

}  // namespace ptree
