#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "ptree/polya_tree.hpp"
#include "ptree/special.hpp"

using namespace ptree;
namespace pts = ptree::testing;

namespace {

std::shared_ptr<const PartitionTree> share(PartitionTree t) { return std::make_shared<const PartitionTree>(std::move(t)); }

}  // namespace

TEST(PolyaTree, UniformPtHasAlphaPerChild) {
  auto tree = share(build_up(SamplingGrid::regular(3)));
  auto pt = uniform_pt(tree, 2.5);
  for (int id = 0; id < tree->size(); ++id) {
    if (tree->is_leaf(id)) {
      EXPECT_TRUE(pt.alpha[id].empty());
    } else {
      for (double a : pt.alpha[id]) EXPECT_EQ(a, 2.5);
    }
  }
}

TEST(PolyaTree, CenteringReproducesBaseMeasureInExpectation) {
  auto tree = share(build_eebp(SamplingGrid::regular(3)));
  std::vector<double> g0(tree->leaf_count());
  for (std::size_t l = 0; l < g0.size(); ++l) g0[l] = 1.0 + static_cast<double>(l % 3);
  double s = std::accumulate(g0.begin(), g0.end(), 0.0);
  for (auto& v : g0) v /= s;
  auto pt = center_on(tree, g0, Concentration{{4.0, 2.0}, 1.0});
  auto m = expected_leaf_masses(pt);
  for (std::size_t l = 0; l < g0.size(); ++l) EXPECT_NEAR(m[l], g0[l], 1e-12);
}

TEST(PolyaTree, NodeCountsSumChildren) {
  auto tree = share(build_up(SamplingGrid::regular(3)));
  LeafCounts c{{3, 0, 5, 2}};
  auto nc = node_counts(*tree, c);
  std::int64_t root = 0;
  for (auto v : nc[0]) root += v;
  EXPECT_EQ(root, 10);
  auto mass = node_mass(*tree, {0.1, 0.2, 0.3, 0.4});
  EXPECT_NEAR(mass[0], 1.0, 1e-15);
}

TEST(PolyaTree, PosteriorAddsCounts) {
  auto tree = share(build_flp(SamplingGrid::regular(3), 1));
  auto pt = uniform_pt(tree, 1.0);
  auto post = posterior_update(pt, LeafCounts{{4, 1, 2}});
  EXPECT_EQ(post.alpha[0], (std::vector<double>{5.0, 4.0}));
  EXPECT_THROW(posterior_update(pt, LeafCounts{{1, 2}}), std::invalid_argument);
}

TEST(PolyaTree, SplitDrawsAreBetaDistributed) {
  auto tree = share(build_flp_range(SamplingGrid::regular(2), 0, 1));
  FinitePT pt{tree, {{2.0, 3.0}, {}, {}}};
  Rng rng(7);
  std::vector<double> x;
  for (int i = 0; i < 20000; ++i) x.push_back(sample_split_probs(pt, rng).v[0][0]);
  double d = pts::ks_statistic(x, [](double v) {
    return v * v * (6.0 - 8.0 * v + 3.0 * v * v);  // Beta(2, 3) CDF
  });
  EXPECT_GT(pts::ks_pvalue(d, x.size()), 1e-3);
}

TEST(PolyaTree, LeafMassByIndexMatchesVector) {
  auto tree = share(build_bivlp(SamplingGrid::regular(3)));
  Rng rng(3);
  auto sp = sample_split_probs(uniform_pt(tree, 1.0), rng);
  auto all = leaf_masses(sp);
  for (int l = 0; l < tree->leaf_count(); ++l) EXPECT_DOUBLE_EQ(leaf_mass(sp, tree->node(tree->leaves()[l]).path), all[l]);
}

TEST(PolyaTree, MarginalOfSingleSplitIsBetaBinomialSequence) {
  auto tree = share(build_flp_range(SamplingGrid::regular(2), 0, 1));
  FinitePT pt{tree, {{1.5, 2.5}, {}, {}}};
  double got = marginal_loglik(pt, LeafCounts{{3, 2}});
  double want = log_beta_fn(1.5 + 3, 2.5 + 2) - log_beta_fn(1.5, 2.5);
  EXPECT_NEAR(got, want, 1e-12);
  EXPECT_EQ(marginal_loglik(pt, LeafCounts{{0, 0}}), 0.0);
}

TEST(PolyaTree, MarginalIsChainRuleOfPredictives) {
  // p(x1, x2) = p(x1) p(x2 | x1) with the posterior predictive from the updated tree.
  auto tree = share(build_up(SamplingGrid::regular(3)));
  auto pt = uniform_pt(tree, 0.8);
  LeafCounts a{{1, 0, 2, 0}}, b{{0, 1, 0, 1}}, ab{{1, 1, 2, 1}};
  double lhs = marginal_loglik(pt, ab);
  double rhs = marginal_loglik(pt, a) + marginal_loglik(posterior_update(pt, a), b);
  EXPECT_NEAR(lhs, rhs, 1e-12);
}

TEST(VarianceFactor, KnownValues) {
  // a = b = 1: Var(X1 X2) / Var(X1) with X ~ U(0,1): (1/9 - 1/16) / (1/12).
  EXPECT_NEAR(variance_factor(1.0, 1.0), (1.0 / 9.0 - 1.0 / 16.0) * 12.0, 1e-14);
  EXPECT_LT(variance_factor(2.0, 50.0), 1.0);
  EXPECT_GT(variance_factor(2.0, 0.1), 1.0);
}
