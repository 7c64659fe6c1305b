#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ptree {

class PartitionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Bound {
  enum class Kind { NegInf, Finite, PosInf };
  Kind kind = Kind::Finite;
  double value = 0.0;

  static Bound neg_inf() { return {Kind::NegInf, 0.0}; }
  static Bound pos_inf() { return {Kind::PosInf, 0.0}; }
  static Bound at(double v) { return {Kind::Finite, v}; }
  bool finite() const { return kind == Kind::Finite; }
};

// Ordered units (intervals) along one axis, delimited by edges; the outer edges may be infinite.
class AxisGrid {
 public:
  AxisGrid() = default;
  explicit AxisGrid(std::vector<Bound> edges);

  int units() const { return static_cast<int>(edges_.size()) - 1; }
  Bound lower(int unit) const { return edges_.at(unit); }
  Bound upper(int unit) const { return edges_.at(unit + 1); }
  double width(int unit) const;     // +inf for tail units
  double midpoint(int unit) const;  // throws for tail units
  // Unit whose open interior holds x; throws PartitionError on an edge or outside the axis.
  int unit_of(double x) const;

 private:
  std::vector<Bound> edges_;
};

class SamplingGrid {
 public:
  explicit SamplingGrid(std::vector<double> times);
  static SamplingGrid regular(int occasions, double start = 1.0, double spacing = 1.0);

  int occasions() const { return static_cast<int>(times_.size()); }
  int intervals() const { return occasions() + 1; }
  double time(int occasion) const { return times_.at(occasion - 1); }  // 1-based, t_1..t_K
  const std::vector<double>& times() const { return times_; }
  // Interval i is (t_i, t_{i+1}) with t_0 = -inf and t_{K+1} = +inf.
  AxisGrid axis() const;

 private:
  std::vector<double> times_;
};

using TreeIndex = std::vector<int>;

struct UnitRange {
  int lo = 0;
  int hi = 0;  // inclusive
  bool contains(int u) const { return u >= lo && u <= hi; }
  int size() const { return hi - lo + 1; }
};

struct Box {
  UnitRange entry;
  UnitRange exit;  // {0,0} for univariate trees
};

struct Cell {
  std::vector<Box> boxes;
  bool contains_unit(int e, int x, bool ordered) const;
};

enum class RuleTag { FLP, BLP, UP, EEBP, BivLP, RRBiv, NestedPeriod };
enum class SplitAxis { None, Entry, Exit, Los };

const char* rule_name(RuleTag tag);

struct Node {
  Cell cell;
  int parent = -1;
  std::vector<int> children;
  int depth = 0;
  TreeIndex path;
  // What the split at this node does: axis and position along its chain
  // (0 for the first split of a chain). Used to build tie maps.
  SplitAxis axis = SplitAxis::None;
  int step = 0;
  // Category per child; the sub-block index for nested-period splits, else 0..arity-1.
  std::vector<int> child_labels;
  int leaf_index = -1;
  // Nested-period resolutions of the entry and exit blocks.
  int entry_level = 0;
  int exit_level = 0;
};

struct NestedPeriodSpec {
  std::vector<int> period_lengths;  // K_1, K_2, ...
  int zero_periods = 1;             // K_0 seasons
  int units_per_season() const;
  void validate() const;
};

class PartitionTree {
 public:
  RuleTag rule() const { return rule_; }
  int dimension() const { return bivariate_ ? 2 : 1; }
  bool ordered() const { return ordered_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const Node& node(int id) const { return nodes_.at(id); }
  const std::vector<Node>& nodes() const { return nodes_; }
  int arity(int id) const { return static_cast<int>(nodes_.at(id).children.size()); }
  bool is_leaf(int id) const { return nodes_.at(id).children.empty(); }
  const std::vector<int>& leaves() const { return leaves_; }
  int leaf_count() const { return static_cast<int>(leaves_.size()); }
  std::vector<int> internal_nodes() const;
  // Internal nodes ordered so that every node comes after all of its descendants.
  std::vector<int> internal_nodes_bottom_up() const;
  int height() const;                      // edges on the longest root-to-leaf path
  int depth() const { return height() + 1; }  // levels, counting the root level

  const AxisGrid& entry_axis() const { return entry_axis_; }
  const AxisGrid& exit_axis() const { return exit_axis_; }
  // Leaf id holding the finest unit (e, x); -1 when the unit is outside the root cell.
  int leaf_of_unit(int e, int x = 0) const;
  bool unit_feasible(int e, int x) const { return !ordered_ || e <= x; }
  double unit_area(int e, int x = 0) const;
  double cell_area(int id) const;
  // Finest units (e, x) covered by a node, in row-major order.
  std::vector<std::pair<int, int>> units_of(int id) const;

  std::optional<int> find(std::span<const int> path) const;
  // Throws PartitionError unless every node's children partition it exactly.
  void validate() const;

 private:
  friend class TreeBuilder;
  RuleTag rule_ = RuleTag::UP;
  bool bivariate_ = false;
  bool ordered_ = false;
  AxisGrid entry_axis_;
  AxisGrid exit_axis_;
  std::vector<Node> nodes_;
  std::vector<int> leaves_;
  std::vector<int> unit_leaf_;  // entry_units x exit_units lookup
  std::vector<double> area_;
};

// Univariate trees over the K+1 grid intervals.
PartitionTree build_flp(const SamplingGrid& grid, int start_index);
PartitionTree build_blp(const SamplingGrid& grid, int end_index);
// Chains over an explicit interval range [lo, hi], used for leaf-set comparisons.
PartitionTree build_flp_range(const SamplingGrid& grid, int lo, int hi);
PartitionTree build_blp_range(const SamplingGrid& grid, int lo, int hi);
PartitionTree build_up(const SamplingGrid& grid);

// Bivariate trees over (entry interval, exit interval) with exit >= entry.
// available_only drops the diagonal (individuals gone before any occasion).
PartitionTree build_eebp(const SamplingGrid& grid, bool available_only = false);
// Slice k of the open-population model: entry in [0, k-1], exit in [k, K].
PartitionTree build_eebp_slice(const SamplingGrid& grid, int k);
PartitionTree build_bivlp(const SamplingGrid& grid);
// Ring-recovery tree over (u_f, u_l) in {0..U}^2.
PartitionTree build_rr_partition(int U);
// One season of the nested-period partition over its finest units.
PartitionTree build_nested_period(const NestedPeriodSpec& spec);

TreeIndex cell_of(const PartitionTree& tree, double x);
TreeIndex cell_of(const PartitionTree& tree, double entry, double exit);

}  // namespace ptree
