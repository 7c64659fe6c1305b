#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "ptree/kernels.hpp"
#include "ptree/mcmc.hpp"
#include "ptree/polya_tree.hpp"
#include "ptree/replicate.hpp"
#include "ptree/special.hpp"

namespace ptree {
struct ModelSpec;
// Open-population EEBP over available cells, exit chains tied across entry cells when requested.
std::shared_ptr<const TieMap> open_population_tie(const ModelSpec& spec);
}  // namespace ptree

namespace ptree::detail {

inline std::string idx(const std::string& name, int i) { return name + "[" + std::to_string(i) + "]"; }

inline double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

// n log(w) - log n!, with 0 * log 0 = 0.
inline double cell_term(std::int64_t n, double logw) {
  if (n == 0) return 0.0;
  if (logw == kNegInf) return kNegInf;
  return static_cast<double>(n) * logw - log_factorial(n);
}

// Runs `moves` proposals of a CountMover over x; delta(move) returns the log target change for an
// already-applied move (or -inf), commit() is called on acceptance.
template <class Delta, class Commit>
void count_moves(CountMover& mover, std::span<std::int64_t> x, int moves, Rng& rng, bool adapt, Delta&& delta,
                 Commit&& commit) {
  const int cells = static_cast<int>(x.size());
  for (int i = 0; i < moves; ++i) {
    auto m = mover.propose(cells, rng);
    if (!mover.apply(m, x)) {
      mover.record(false, adapt);
      continue;
    }
    double d = delta(m);
    if (mh_accept(d, rng)) {
      commit(m);
      mover.record(true, adapt);
    } else {
      mover.undo(m, x);
      mover.record(false, adapt);
    }
  }
}

// Single dyadic tree whose nodes are grouped into tie classes with a shared Beta(a, b) split each.
struct TiedDyadicTree {
  std::shared_ptr<const TieMap> tie;
  std::vector<double> v;  // per class, probability of child 0

  const PartitionTree& tree() const { return tie->tree(0); }

  void draw_prior(double a, double b, Rng& rng) {
    v.assign(tie->class_count(), 0.5);
    for (auto& x : v) x = rng.beta(a, b);
  }

  void update(const std::vector<std::int64_t>& leaf_counts, double a, double b, Rng& rng) {
    auto nc = node_counts(tree(), LeafCounts{leaf_counts});
    for (int c = 0; c < tie->class_count(); ++c) {
      std::int64_t s0 = 0, s1 = 0;
      for (const NodeRef& r : tie->members(c)) {
        s0 += nc[r.node][0];
        s1 += nc[r.node][1];
      }
      v[c] = kernel_beta_V(s0, s1, a, b, rng);
    }
  }

  std::vector<double> leaf_masses() const {
    SplitProbs sp;
    sp.tree = tie->forest()[0];
    sp.v.assign(tree().size(), {});
    for (int id : tree().internal_nodes()) {
      double p0 = v[tie->class_of({0, id})];
      sp.v[id] = {p0, 1.0 - p0};
    }
    return ptree::leaf_masses(sp);
  }
};

// Leaf index of every (entry, exit) unit pair, -1 when outside the tree.
inline std::vector<std::vector<int>> unit_leaf_table(const PartitionTree& t, int units) {
  std::vector<std::vector<int>> out(units, std::vector<int>(units, -1));
  for (int e = 0; e < units; ++e)
    for (int x = 0; x < units; ++x) {
      if (!t.unit_feasible(e, x)) continue;
      int leaf = t.leaf_of_unit(e, x);
      if (leaf >= 0) out[e][x] = t.node(leaf).leaf_index;
    }
  return out;
}

}  // namespace ptree::detail
