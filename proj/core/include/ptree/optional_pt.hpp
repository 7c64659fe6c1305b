#pragma once

#include <cstdint>
#include <vector>

#include "ptree/partition.hpp"
#include "ptree/polya_tree.hpp"
#include "ptree/rng.hpp"

namespace ptree {

struct StopState {
  std::vector<std::uint8_t> s;  // per node; leaves forced to 1
  double rho = 0.1;
  int min_depth = 0;            // nodes shallower than this never stop
  std::vector<std::uint8_t> allowed;  // optional per-node override of min_depth

  static StopState none(const PartitionTree& tree, double rho, int min_depth = 0);
  bool can_stop(const PartitionTree& tree, int id) const {
    return allowed.empty() ? tree.node(id).depth >= min_depth : allowed[id] != 0;
  }
  void validate(const PartitionTree& tree) const;
};

// First node on the root-to-id path (inclusive) that is stopped, or -1.
int stopped_ancestor(const PartitionTree& tree, const StopState& stop, int id);
// True if neither the node nor any ancestor is stopped.
bool active(const PartitionTree& tree, const StopState& stop, int id);

double opt_density(const PartitionTree& tree, const StopState& stop, const SplitProbs& splits, double x);
double opt_density(const PartitionTree& tree, const StopState& stop, const SplitProbs& splits, double entry,
                   double exit);
// Probability of every finest unit leaf: path mass to the first stopped node times the area share.
std::vector<double> opt_leaf_masses(const PartitionTree& tree, const StopState& stop, const SplitProbs& splits);

// Log probabilities of the leaves below `id`, conditional on falling in `id`, under
// (a) the uniform law on the cell and (b) the current subtree law.
double uniform_conditional_loglik(const PartitionTree& tree, int id, const std::vector<std::int64_t>& leaf_counts);
double subtree_conditional_loglik(const PartitionTree& tree, const StopState& stop, const SplitProbs& splits, int id,
                                  const std::vector<std::int64_t>& leaf_counts);

// Posterior draw of S at `id` given data in the cell. Children must already be refreshed:
// `refreshed` marks nodes updated this sweep and is checked.
std::uint8_t update_stop_indicator(const PartitionTree& tree, int id, StopState& stop, const SplitProbs& splits,
                                   const std::vector<std::int64_t>& leaf_counts, Rng& rng,
                                   std::vector<std::uint8_t>* refreshed = nullptr);
// Bottom-up sweep over all stoppable internal nodes.
void update_stop_indicators(const PartitionTree& tree, StopState& stop, const SplitProbs& splits,
                            const std::vector<std::int64_t>& leaf_counts, Rng& rng);

}  // namespace ptree
