#include "ptree/partition.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace ptree {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

bool below(const Bound& b, double x) {  // b < x
  switch (b.kind) {
    case Bound::Kind::NegInf: return true;
    case Bound::Kind::PosInf: return false;
    default: return b.value < x;
  }
}
bool above(const Bound& b, double x) {  // b > x
  switch (b.kind) {
    case Bound::Kind::NegInf: return false;
    case Bound::Kind::PosInf: return true;
    default: return b.value > x;
  }
}
}  // namespace

AxisGrid::AxisGrid(std::vector<Bound> edges) : edges_(std::move(edges)) {
  if (edges_.size() < 2) throw PartitionError("axis needs at least one unit");
  for (std::size_t i = 1; i + 1 < edges_.size(); ++i)
    if (!edges_[i].finite()) throw PartitionError("only outer axis edges may be infinite");
  for (std::size_t i = 0; i + 1 < edges_.size(); ++i) {
    const Bound& a = edges_[i];
    const Bound& b = edges_[i + 1];
    if (a.finite() && b.finite() && !(a.value < b.value)) throw PartitionError("axis edges must increase");
  }
}

double AxisGrid::width(int unit) const {
  Bound a = lower(unit), b = upper(unit);
  if (!a.finite() || !b.finite()) return kInf;
  return b.value - a.value;
}

double AxisGrid::midpoint(int unit) const {
  Bound a = lower(unit), b = upper(unit);
  if (!a.finite() || !b.finite()) throw PartitionError("tail unit has no midpoint");
  return 0.5 * (a.value + b.value);
}

int AxisGrid::unit_of(double x) const {
  if (!std::isfinite(x)) throw PartitionError("point must be finite");
  for (int u = 0; u < units(); ++u) {
    const Bound& a = edges_[u];
    const Bound& b = edges_[u + 1];
    if ((a.finite() && a.value == x) || (b.finite() && b.value == x))
      throw PartitionError("point " + std::to_string(x) + " lies on a grid boundary");
    if (below(a, x) && above(b, x)) return u;
  }
  throw PartitionError("point " + std::to_string(x) + " lies outside the axis");
}

SamplingGrid::SamplingGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.size() < 2) throw PartitionError("sampling grid needs K >= 2 occasions");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i])) throw PartitionError("sampling times must be finite");
    if (i > 0 && !(times_[i - 1] < times_[i])) throw PartitionError("sampling times must be strictly increasing");
  }
}

SamplingGrid SamplingGrid::regular(int occasions, double start, double spacing) {
  if (spacing <= 0.0) throw PartitionError("grid spacing must be positive");
  std::vector<double> t(static_cast<std::size_t>(std::max(occasions, 0)));
  for (int i = 0; i < occasions; ++i) t[i] = start + spacing * i;
  return SamplingGrid(std::move(t));
}

AxisGrid SamplingGrid::axis() const {
  std::vector<Bound> edges;
  edges.push_back(Bound::neg_inf());
  for (double t : times_) edges.push_back(Bound::at(t));
  edges.push_back(Bound::pos_inf());
  return AxisGrid(std::move(edges));
}

bool Cell::contains_unit(int e, int x, bool ordered) const {
  if (ordered && e > x) return false;
  for (const Box& b : boxes)
    if (b.entry.contains(e) && b.exit.contains(x)) return true;
  return false;
}

const char* rule_name(RuleTag tag) {
  switch (tag) {
    case RuleTag::FLP: return "FLP";
    case RuleTag::BLP: return "BLP";
    case RuleTag::UP: return "UP";
    case RuleTag::EEBP: return "EEBP";
    case RuleTag::BivLP: return "BivLP";
    case RuleTag::RRBiv: return "RRBiv";
    case RuleTag::NestedPeriod: return "NestedPeriod";
  }
  return "?";
}

int NestedPeriodSpec::units_per_season() const {
  int t = 1;
  for (int k : period_lengths) t *= k;
  return t;
}

void NestedPeriodSpec::validate() const {
  if (period_lengths.empty()) throw PartitionError("nested-period spec needs at least one period level");
  for (int k : period_lengths)
    if (k < 2) throw PartitionError("nested-period arities must be >= 2");
  if (zero_periods < 1) throw PartitionError("nested-period spec needs at least one season");
}

std::vector<int> PartitionTree::internal_nodes() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (!is_leaf(i)) out.push_back(i);
  return out;
}

std::vector<int> PartitionTree::internal_nodes_bottom_up() const {
  std::vector<int> out = internal_nodes();
  std::stable_sort(out.begin(), out.end(), [&](int a, int b) { return nodes_[a].depth > nodes_[b].depth; });
  return out;
}

int PartitionTree::height() const {
  int h = 0;
  for (const Node& n : nodes_) h = std::max(h, n.depth);
  return h;
}

int PartitionTree::leaf_of_unit(int e, int x) const {
  int xu = bivariate_ ? exit_axis_.units() : 1;
  if (e < 0 || e >= entry_axis_.units() || x < 0 || x >= xu) return -1;
  return unit_leaf_[static_cast<std::size_t>(e) * xu + x];
}

double PartitionTree::unit_area(int e, int x) const {
  double a = entry_axis_.width(e);
  if (bivariate_) {
    a *= exit_axis_.width(x);
    if (ordered_ && e == x) a *= 0.5;
  }
  return a;
}

double PartitionTree::cell_area(int id) const {
  if (!area_.empty()) return area_.at(id);
  double a = 0.0;
  for (auto [e, x] : units_of(id)) a += unit_area(e, x);
  return a;
}

std::vector<std::pair<int, int>> PartitionTree::units_of(int id) const {
  std::vector<std::pair<int, int>> out;
  for (const Box& b : nodes_.at(id).cell.boxes)
    for (int e = b.entry.lo; e <= b.entry.hi; ++e)
      for (int x = b.exit.lo; x <= b.exit.hi; ++x)
        if (!bivariate_ || unit_feasible(e, x)) out.emplace_back(e, x);
  return out;
}

std::optional<int> PartitionTree::find(std::span<const int> path) const {
  int id = 0;
  for (int c : path) {
    if (c < 0 || c >= arity(id)) return std::nullopt;
    id = nodes_[id].children[c];
  }
  return id;
}

void PartitionTree::validate() const {
  for (int id = 0; id < size(); ++id) {
    const Node& n = nodes_[id];
    auto units = units_of(id);
    std::sort(units.begin(), units.end());
    if (units.empty()) throw PartitionError("node " + std::to_string(id) + " has an empty cell");
    if (std::adjacent_find(units.begin(), units.end()) != units.end())
      throw PartitionError("node " + std::to_string(id) + " has overlapping boxes");
    if (n.children.empty()) continue;
    if (n.children.size() < 2) throw PartitionError("unary split at node " + std::to_string(id));
    std::vector<std::pair<int, int>> joined;
    for (int c : n.children) {
      auto cu = units_of(c);
      joined.insert(joined.end(), cu.begin(), cu.end());
    }
    std::sort(joined.begin(), joined.end());
    if (std::adjacent_find(joined.begin(), joined.end()) != joined.end())
      throw PartitionError("children of node " + std::to_string(id) + " overlap");
    if (joined != units) throw PartitionError("children of node " + std::to_string(id) + " do not cover it");
  }
}

class TreeBuilder {
 public:
  TreeBuilder(RuleTag rule, bool bivariate, bool ordered, AxisGrid entry, AxisGrid exit) {
    t_.rule_ = rule;
    t_.bivariate_ = bivariate;
    t_.ordered_ = ordered;
    t_.entry_axis_ = std::move(entry);
    t_.exit_axis_ = std::move(exit);
  }

  int add_root(Cell c) {
    Node n;
    n.cell = std::move(c);
    t_.nodes_.push_back(std::move(n));
    return 0;
  }

  int add_child(int parent, Cell c, int label) {
    Node n;
    n.cell = std::move(c);
    n.parent = parent;
    n.depth = t_.nodes_[parent].depth + 1;
    n.path = t_.nodes_[parent].path;
    n.path.push_back(static_cast<int>(t_.nodes_[parent].children.size()));
    n.entry_level = t_.nodes_[parent].entry_level;
    n.exit_level = t_.nodes_[parent].exit_level;
    int id = static_cast<int>(t_.nodes_.size());
    t_.nodes_.push_back(std::move(n));
    t_.nodes_[parent].children.push_back(id);
    t_.nodes_[parent].child_labels.push_back(label);
    return id;
  }

  void set_split(int id, SplitAxis axis, int step) {
    t_.nodes_[id].axis = axis;
    t_.nodes_[id].step = step;
  }
  Node& node(int id) { return t_.nodes_[id]; }

  PartitionTree finish() {
    // Leaves in left-to-right depth-first order.
    std::vector<int> stack{0};
    while (!stack.empty()) {
      int id = stack.back();
      stack.pop_back();
      const Node& n = t_.nodes_[id];
      if (n.children.empty()) {
        t_.nodes_[id].leaf_index = static_cast<int>(t_.leaves_.size());
        t_.leaves_.push_back(id);
      }
      for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
    }
    int xu = t_.bivariate_ ? t_.exit_axis_.units() : 1;
    t_.unit_leaf_.assign(static_cast<std::size_t>(t_.entry_axis_.units()) * xu, -1);
    for (int leaf : t_.leaves_)
      for (auto [e, x] : t_.units_of(leaf)) t_.unit_leaf_[static_cast<std::size_t>(e) * xu + x] = leaf;
    t_.validate();
    std::vector<double> area(t_.nodes_.size());
    for (int id = 0; id < t_.size(); ++id) area[id] = t_.cell_area(id);
    t_.area_ = std::move(area);
    return std::move(t_);
  }

 private:
  PartitionTree t_;
};

namespace {

using MakeCell = std::function<Cell(UnitRange)>;
using OnTerminal = std::function<void(int node, int unit)>;

// Node covers [lo, hi]; splits off the lowest unit until one remains.
void forward_chain(TreeBuilder& b, int node, int lo, int hi, int step, SplitAxis axis, const MakeCell& make,
                   const OnTerminal& terminal) {
  while (lo < hi) {
    b.set_split(node, axis, step);
    int left = b.add_child(node, make({lo, lo}), 0);
    int right = b.add_child(node, make({lo + 1, hi}), 1);
    if (terminal) terminal(left, lo);
    node = right;
    ++lo;
    ++step;
  }
  if (terminal) terminal(node, lo);
}

// Node covers [lo, hi]; splits off the highest unit until one remains.
void backward_chain(TreeBuilder& b, int node, int lo, int hi, int step, SplitAxis axis, const MakeCell& make,
                    const OnTerminal& terminal) {
  while (lo < hi) {
    b.set_split(node, axis, step);
    int left = b.add_child(node, make({lo, hi - 1}), 0);
    int right = b.add_child(node, make({hi, hi}), 1);
    if (terminal) terminal(right, hi);
    node = left;
    --hi;
    ++step;
  }
  if (terminal) terminal(node, lo);
}

Cell box1(UnitRange r) { return Cell{{Box{r, {0, 0}}}}; }

void check_range(const SamplingGrid& grid, int lo, int hi) {
  if (lo < 0 || hi > grid.occasions() || lo > hi) throw PartitionError("interval range out of bounds");
}

AxisGrid count_axis(int units) {
  std::vector<Bound> edges;
  for (int i = 0; i <= units; ++i) edges.push_back(Bound::at(i));
  return AxisGrid(std::move(edges));
}

}  // namespace

PartitionTree build_flp_range(const SamplingGrid& grid, int lo, int hi) {
  check_range(grid, lo, hi);
  TreeBuilder b(RuleTag::FLP, false, false, grid.axis(), AxisGrid({Bound::at(0), Bound::at(1)}));
  b.add_root(box1({lo, hi}));
  forward_chain(b, 0, lo, hi, 0, SplitAxis::Exit, box1, nullptr);
  return b.finish();
}

PartitionTree build_blp_range(const SamplingGrid& grid, int lo, int hi) {
  check_range(grid, lo, hi);
  TreeBuilder b(RuleTag::BLP, false, false, grid.axis(), AxisGrid({Bound::at(0), Bound::at(1)}));
  b.add_root(box1({lo, hi}));
  backward_chain(b, 0, lo, hi, 0, SplitAxis::Exit, box1, nullptr);
  return b.finish();
}

PartitionTree build_flp(const SamplingGrid& grid, int start_index) {
  if (start_index < 1 || start_index > grid.occasions()) throw PartitionError("FLP start index out of range");
  return build_flp_range(grid, start_index, grid.occasions());
}

PartitionTree build_blp(const SamplingGrid& grid, int end_index) {
  if (end_index < 1 || end_index > grid.occasions()) throw PartitionError("BLP end index out of range");
  return build_blp_range(grid, 0, end_index);
}

PartitionTree build_up(const SamplingGrid& grid) {
  int K = grid.occasions();
  TreeBuilder b(RuleTag::UP, false, false, grid.axis(), AxisGrid({Bound::at(0), Bound::at(1)}));
  b.add_root(box1({0, K}));
  b.set_split(0, SplitAxis::Exit, 0);
  for (int i = 0; i <= K; ++i) b.add_child(0, box1({i, i}), i);
  return b.finish();
}

PartitionTree build_eebp(const SamplingGrid& grid, bool available_only) {
  int K = grid.occasions();
  TreeBuilder b(RuleTag::EEBP, true, true, grid.axis(), grid.axis());
  if (!available_only) {
    b.add_root(Cell{{Box{{0, K}, {0, K}}}});
    forward_chain(
        b, 0, 0, K, 0, SplitAxis::Entry, [K](UnitRange r) { return Cell{{Box{r, {r.lo, K}}}}; },
        [&](int node, int f) {
          backward_chain(
              b, node, f, K, 0, SplitAxis::Exit, [f](UnitRange r) { return Cell{{Box{{f, f}, r}}}; }, nullptr);
        });
    return b.finish();
  }
  // Exit strictly after entry: one box per entry row keeps the diagonal out.
  auto rows = [K](UnitRange r) {
    Cell c;
    for (int f = r.lo; f <= r.hi; ++f) c.boxes.push_back(Box{{f, f}, {f + 1, K}});
    return c;
  };
  b.add_root(rows({0, K - 1}));
  forward_chain(b, 0, 0, K - 1, 0, SplitAxis::Entry, rows, [&](int node, int f) {
    backward_chain(
        b, node, f + 1, K, 0, SplitAxis::Exit, [f](UnitRange r) { return Cell{{Box{{f, f}, r}}}; }, nullptr);
  });
  return b.finish();
}

PartitionTree build_eebp_slice(const SamplingGrid& grid, int k) {
  int K = grid.occasions();
  if (k < 1 || k > K) throw PartitionError("slice index out of range");
  TreeBuilder b(RuleTag::EEBP, true, true, grid.axis(), grid.axis());
  b.add_root(Cell{{Box{{0, k - 1}, {k, K}}}});
  forward_chain(
      b, 0, 0, k - 1, 0, SplitAxis::Entry, [k, K](UnitRange r) { return Cell{{Box{r, {k, K}}}}; },
      [&](int node, int f) {
        backward_chain(
            b, node, k, K, 0, SplitAxis::Exit, [f](UnitRange r) { return Cell{{Box{{f, f}, r}}}; }, nullptr);
      });
  return b.finish();
}

PartitionTree build_bivlp(const SamplingGrid& grid) {
  int K = grid.occasions();
  TreeBuilder b(RuleTag::BivLP, true, true, grid.axis(), grid.axis());
  auto los_cell = [K](UnitRange r) {
    Cell c;
    for (int L = r.lo; L <= r.hi; ++L)
      for (int f = 0; f + L <= K; ++f) c.boxes.push_back(Box{{f, f}, {f + L, f + L}});
    return c;
  };
  b.add_root(los_cell({0, K}));
  forward_chain(b, 0, 0, K, 0, SplitAxis::Los, los_cell, [&](int node, int L) {
    if (K - L < 1) return;
    b.set_split(node, SplitAxis::Entry, 0);
    for (int f = 0; f + L <= K; ++f) b.add_child(node, Cell{{Box{{f, f}, {f + L, f + L}}}}, f);
  });
  return b.finish();
}

PartitionTree build_rr_partition(int U) {
  if (U < 1) throw PartitionError("ring-recovery bound U must be >= 1");
  TreeBuilder b(RuleTag::RRBiv, true, false, count_axis(U + 1), count_axis(U + 1));
  auto los_cell = [U](UnitRange r) {
    Cell c;
    for (int L = r.lo; L <= r.hi; ++L)
      for (int uf = std::max(0, L - U); uf <= std::min(U, L); ++uf) c.boxes.push_back(Box{{uf, uf}, {L - uf, L - uf}});
    return c;
  };
  b.add_root(los_cell({0, 2 * U}));
  forward_chain(b, 0, 0, 2 * U, 0, SplitAxis::Los, los_cell, [&](int node, int L) {
    int lo = std::max(0, L - U), hi = std::min(U, L);
    if (hi == lo) return;
    b.set_split(node, SplitAxis::Exit, 0);
    // children ordered by exit year u_l ascending
    for (int ul = L - hi; ul <= L - lo; ++ul) b.add_child(node, Cell{{Box{{L - ul, L - ul}, {ul, ul}}}}, ul);
  });
  return b.finish();
}

PartitionTree build_nested_period(const NestedPeriodSpec& spec) {
  spec.validate();
  const int T = spec.units_per_season();
  const int levels = static_cast<int>(spec.period_lengths.size());
  std::vector<int> block(levels + 1);  // block size at each resolution
  block[0] = T;
  for (int i = 1; i <= levels; ++i) block[i] = block[i - 1] / spec.period_lengths[i - 1];

  TreeBuilder b(RuleTag::NestedPeriod, true, true, count_axis(T), count_axis(T));
  b.add_root(Cell{{Box{{0, T - 1}, {0, T - 1}}}});

  std::function<void(int, UnitRange, UnitRange, int, int)> grow = [&](int node, UnitRange e, UnitRange x, int n,
                                                                       int m) {
    while (n < levels || m < levels) {
      bool split_entry = (n == m);
      int level = split_entry ? n + 1 : m + 1;
      int parts = spec.period_lengths[level - 1];
      UnitRange whole = split_entry ? e : x;
      std::vector<std::pair<int, UnitRange>> feasible;
      for (int j = 0; j < parts; ++j) {
        UnitRange sub{whole.lo + j * block[level], whole.lo + (j + 1) * block[level] - 1};
        UnitRange ce = split_entry ? sub : e;
        UnitRange cx = split_entry ? x : sub;
        if (ce.lo <= cx.hi) feasible.emplace_back(j, sub);
      }
      if (split_entry) ++n; else ++m;
      if (feasible.size() == 1) {
        if (split_entry) e = feasible[0].second; else x = feasible[0].second;
        b.node(node).entry_level = n;
        b.node(node).exit_level = m;
        continue;
      }
      b.set_split(node, split_entry ? SplitAxis::Entry : SplitAxis::Exit, level - 1);
      for (auto& [j, sub] : feasible) {
        UnitRange ce = split_entry ? sub : e;
        UnitRange cx = split_entry ? x : sub;
        int child = b.add_child(node, Cell{{Box{ce, cx}}}, j);
        b.node(child).entry_level = n;
        b.node(child).exit_level = m;
        grow(child, ce, cx, n, m);
      }
      return;
    }
  };
  grow(0, {0, T - 1}, {0, T - 1}, 0, 0);
  return b.finish();
}

TreeIndex cell_of(const PartitionTree& tree, double x) {
  if (tree.dimension() != 1) throw PartitionError("univariate point given to a bivariate tree");
  int u = tree.entry_axis().unit_of(x);
  if (!tree.node(0).cell.contains_unit(u, 0, false)) throw PartitionError("point outside the root cell");
  int id = 0;
  while (!tree.is_leaf(id)) {
    int next = -1;
    for (int c : tree.node(id).children)
      if (tree.node(c).cell.contains_unit(u, 0, false)) next = c;
    id = next;
  }
  return tree.node(id).path;
}

TreeIndex cell_of(const PartitionTree& tree, double entry, double exit) {
  if (tree.dimension() != 2) throw PartitionError("bivariate point given to a univariate tree");
  int e = tree.entry_axis().unit_of(entry);
  int x = tree.exit_axis().unit_of(exit);
  if (tree.ordered() && e == x && !(exit > entry)) throw PartitionError("exit must follow entry");
  if (!tree.node(0).cell.contains_unit(e, x, tree.ordered())) throw PartitionError("point outside the root cell");
  int id = 0;
  while (!tree.is_leaf(id)) {
    int next = -1;
    for (int c : tree.node(id).children)
      if (tree.node(c).cell.contains_unit(e, x, tree.ordered())) next = c;
    id = next;
  }
  return tree.node(id).path;
}

}  // namespace ptree
