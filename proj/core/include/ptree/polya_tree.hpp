#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "ptree/partition.hpp"
#include "ptree/rng.hpp"

namespace ptree {

// Per-level concentration: the total alpha mass given to the children of a node at a given depth.
struct Concentration {
  std::vector<double> per_level;
  double fallback = 1.0;
  double at(int depth) const {
    return depth < static_cast<int>(per_level.size()) ? per_level[depth] : fallback;
  }
};

struct FinitePT {
  std::shared_ptr<const PartitionTree> tree;
  std::vector<std::vector<double>> alpha;  // per node, one entry per child; empty for leaves
};

struct SplitProbs {
  std::shared_ptr<const PartitionTree> tree;
  std::vector<std::vector<double>> v;
};

struct LeafCounts {
  std::vector<std::int64_t> counts;  // in tree leaf order
};

// Same alpha vector at every internal node (e.g. (a, b) for a dyadic tree).
FinitePT uniform_pt(std::shared_ptr<const PartitionTree> tree, double alpha_per_child);
// Centering: alpha_child = c(depth) * G0(child) / G0(node), with G0 given as a mass per leaf.
FinitePT center_on(std::shared_ptr<const PartitionTree> tree, const std::vector<double>& leaf_mass,
                   const Concentration& concentration);
FinitePT center_on(std::shared_ptr<const PartitionTree> tree, const std::function<double(int leaf)>& g0,
                   const Concentration& concentration);

// Sum of leaf quantities over each node's subtree.
std::vector<double> node_mass(const PartitionTree& tree, const std::vector<double>& leaf_mass);
// Per node, per child subtree counts.
std::vector<std::vector<std::int64_t>> node_counts(const PartitionTree& tree, const LeafCounts& counts);

FinitePT posterior_update(const FinitePT& pt, const LeafCounts& counts);
SplitProbs sample_split_probs(const FinitePT& pt, Rng& rng);
double leaf_mass(const SplitProbs& sp, const TreeIndex& idx);
std::vector<double> leaf_masses(const SplitProbs& sp);
// Mean leaf masses E[G(B)] under a FinitePT.
std::vector<double> expected_leaf_masses(const FinitePT& pt);
// Log marginal probability of an ordered sample with the given leaf counts.
double marginal_loglik(const FinitePT& pt, const LeafCounts& counts);
// Var(X1 X2) / Var(X1) for X1 ~ Beta(a, a), X2 ~ Beta(b, b) independent.
double variance_factor(double alpha, double beta);

}  // namespace ptree
