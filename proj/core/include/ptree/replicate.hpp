#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ptree/partition.hpp"

namespace ptree {

struct NodeRef {
  int tree = 0;
  int node = 0;
  bool operator==(const NodeRef&) const = default;
};

enum class CjsConstraint { Constant, Age, Time, Unconstrained };
CjsConstraint parse_cjs_constraint(const std::string& s);
const char* cjs_constraint_name(CjsConstraint c);

// Equivalence classes of internal nodes across a forest; tied nodes share one split vector.
class TieMap {
 public:
  explicit TieMap(std::vector<std::shared_ptr<const PartitionTree>> forest);

  // Throws std::invalid_argument if either node is a leaf or arities/split axes differ.
  void tie(NodeRef a, NodeRef b);

  int class_count() const { return static_cast<int>(members_.size()); }
  int class_of(NodeRef r) const;  // -1 for leaves
  const std::vector<NodeRef>& members(int cls) const { return members_.at(cls); }
  NodeRef representative(int cls) const { return members_.at(cls).front(); }
  int arity(int cls) const;
  const std::vector<std::shared_ptr<const PartitionTree>>& forest() const { return forest_; }
  const PartitionTree& tree(int t) const { return *forest_.at(t); }
  // Every internal node is in exactly one class and classes are structurally consistent.
  void validate() const;

 private:
  int find(int flat) const;
  int flat(NodeRef r) const { return offsets_.at(r.tree) + r.node; }
  void rebuild();

  std::vector<std::shared_ptr<const PartitionTree>> forest_;
  std::vector<int> offsets_;
  std::vector<int> parent_;
  std::vector<int> class_index_;
  std::vector<std::vector<NodeRef>> members_;
};

// Forest of FLP(k) trees, k = 1..K, with V^k_j tied per constraint mode.
TieMap cjs_tie_map(const SamplingGrid& grid, CjsConstraint mode);
TieMap cjs_tie_map(int K, CjsConstraint mode);
// Single EEBP tree; exit-chain nodes tied by chain step across entry cells.
TieMap eebp_exit_tie_map(const SamplingGrid& grid, bool available_only = false);
// Slices k = 1..K of the open-population model, tied by chain step across entry cells and slices.
TieMap eebp_slice_tie_map(const SamplingGrid& grid);
// K copies of the ring-recovery tree with node i tied across all copies.
TieMap rr_slice_tie_map(int K, int U);

// per_tree_node_counts[t][node] = per-child counts; returns per-class summed counts.
std::vector<std::vector<std::int64_t>> pooled_counts(
    const TieMap& tie, const std::vector<std::vector<std::vector<std::int64_t>>>& per_tree_node_counts);

// Broadcast one split vector per class to every member: out[t][node].
std::vector<std::vector<std::vector<double>>> broadcast_splits(const TieMap& tie,
                                                               const std::vector<std::vector<double>>& class_values);

}  // namespace ptree
