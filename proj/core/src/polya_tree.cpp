#include "ptree/polya_tree.hpp"

#include <cmath>
#include <stdexcept>

#include "ptree/special.hpp"

namespace ptree {

FinitePT uniform_pt(std::shared_ptr<const PartitionTree> tree, double alpha_per_child) {
  if (!(alpha_per_child > 0.0)) throw std::invalid_argument("alpha must be positive");
  FinitePT pt;
  pt.alpha.resize(tree->size());
  for (int id = 0; id < tree->size(); ++id) pt.alpha[id].assign(tree->arity(id), alpha_per_child);
  pt.tree = std::move(tree);
  return pt;
}

std::vector<double> node_mass(const PartitionTree& tree, const std::vector<double>& leaf_mass) {
  if (static_cast<int>(leaf_mass.size()) != tree.leaf_count()) throw std::invalid_argument("leaf vector size mismatch");
  std::vector<double> m(tree.size(), 0.0);
  for (int id = tree.size() - 1; id >= 0; --id) {
    const Node& n = tree.node(id);
    if (n.children.empty()) {
      m[id] = leaf_mass[n.leaf_index];
    } else {
      for (int c : n.children) m[id] += m[c];
    }
  }
  return m;
}

FinitePT center_on(std::shared_ptr<const PartitionTree> tree, const std::vector<double>& leaf_mass,
                   const Concentration& concentration) {
  for (double g : leaf_mass)
    if (!(g > 0.0)) throw std::invalid_argument("base measure must give every leaf positive mass");
  auto m = node_mass(*tree, leaf_mass);
  FinitePT pt;
  pt.alpha.resize(tree->size());
  for (int id = 0; id < tree->size(); ++id) {
    const Node& n = tree->node(id);
    double c = concentration.at(n.depth);
    if (!(c > 0.0)) throw std::invalid_argument("concentration must be positive");
    for (int ch : n.children) pt.alpha[id].push_back(c * m[ch] / m[id]);
  }
  pt.tree = std::move(tree);
  return pt;
}

FinitePT center_on(std::shared_ptr<const PartitionTree> tree, const std::function<double(int leaf)>& g0,
                   const Concentration& concentration) {
  std::vector<double> leaf_mass(tree->leaf_count());
  for (int i = 0; i < tree->leaf_count(); ++i) leaf_mass[i] = g0(i);
  return center_on(std::move(tree), leaf_mass, concentration);
}

std::vector<std::vector<std::int64_t>> node_counts(const PartitionTree& tree, const LeafCounts& counts) {
  if (static_cast<int>(counts.counts.size()) != tree.leaf_count()) throw std::invalid_argument("leaf count size mismatch");
  std::vector<std::int64_t> total(tree.size(), 0);
  for (int id = tree.size() - 1; id >= 0; --id) {
    const Node& n = tree.node(id);
    if (n.children.empty()) {
      std::int64_t c = counts.counts[n.leaf_index];
      if (c < 0) throw std::invalid_argument("negative leaf count");
      total[id] = c;
    } else {
      for (int ch : n.children) total[id] += total[ch];
    }
  }
  std::vector<std::vector<std::int64_t>> out(tree.size());
  for (int id = 0; id < tree.size(); ++id)
    for (int ch : tree.node(id).children) out[id].push_back(total[ch]);
  return out;
}

FinitePT posterior_update(const FinitePT& pt, const LeafCounts& counts) {
  auto nc = node_counts(*pt.tree, counts);
  FinitePT out = pt;
  for (int id = 0; id < pt.tree->size(); ++id)
    for (std::size_t j = 0; j < nc[id].size(); ++j) out.alpha[id][j] += static_cast<double>(nc[id][j]);
  return out;
}

SplitProbs sample_split_probs(const FinitePT& pt, Rng& rng) {
  SplitProbs sp;
  sp.tree = pt.tree;
  sp.v.resize(pt.alpha.size());
  for (std::size_t id = 0; id < pt.alpha.size(); ++id)
    if (!pt.alpha[id].empty()) sp.v[id] = rng.dirichlet(pt.alpha[id]);
  return sp;
}

double leaf_mass(const SplitProbs& sp, const TreeIndex& idx) {
  double m = 1.0;
  int id = 0;
  for (int c : idx) {
    if (c < 0 || c >= sp.tree->arity(id)) throw std::out_of_range("tree index out of range");
    m *= sp.v[id][c];
    id = sp.tree->node(id).children[c];
  }
  return m;
}

namespace {
std::vector<double> masses_from(const PartitionTree& tree, const std::vector<std::vector<double>>& v) {
  std::vector<double> node(tree.size(), 0.0);
  node[0] = 1.0;
  std::vector<double> out(tree.leaf_count(), 0.0);
  for (int id = 0; id < tree.size(); ++id) {
    const Node& n = tree.node(id);
    if (n.children.empty()) {
      out[n.leaf_index] = node[id];
      continue;
    }
    for (std::size_t j = 0; j < n.children.size(); ++j) node[n.children[j]] = node[id] * v[id][j];
  }
  return out;
}
}  // namespace

std::vector<double> leaf_masses(const SplitProbs& sp) { return masses_from(*sp.tree, sp.v); }

std::vector<double> expected_leaf_masses(const FinitePT& pt) {
  std::vector<std::vector<double>> mean(pt.alpha.size());
  for (std::size_t id = 0; id < pt.alpha.size(); ++id) {
    double s = 0.0;
    for (double a : pt.alpha[id]) s += a;
    for (double a : pt.alpha[id]) mean[id].push_back(a / s);
  }
  return masses_from(*pt.tree, mean);
}

double marginal_loglik(const FinitePT& pt, const LeafCounts& counts) {
  auto nc = node_counts(*pt.tree, counts);
  double out = 0.0;
  for (std::size_t id = 0; id < nc.size(); ++id) {
    const auto& a = pt.alpha[id];
    if (a.empty()) continue;
    double sa = 0.0, sn = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (nc[id][j] == 0) continue;
      out += log_gamma(a[j] + static_cast<double>(nc[id][j])) - log_gamma(a[j]);
      sn += static_cast<double>(nc[id][j]);
    }
    for (double x : a) sa += x;
    if (sn > 0) out += log_gamma(sa) - log_gamma(sa + sn);
  }
  return out;
}

double variance_factor(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("variance_factor needs positive parameters");
  return (2.0 * alpha + 2.0 * beta + 3.0) / (4.0 * (2.0 * beta + 1.0));
}

}  // namespace ptree
