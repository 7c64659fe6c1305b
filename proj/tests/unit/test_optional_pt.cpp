#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "ptree/optional_pt.hpp"
#include "ptree/special.hpp"

using namespace ptree;

namespace {

std::shared_ptr<const PartitionTree> nested_tree() {
  NestedPeriodSpec np;
  np.period_lengths = {2, 2};
  np.zero_periods = 1;
  return std::make_shared<const PartitionTree>(build_nested_period(np));
}

}  // namespace

TEST(StopState, NoneStopsOnlyLeaves) {
  auto t = nested_tree();
  auto st = StopState::none(*t, 0.3, 1);
  for (int id = 0; id < t->size(); ++id) EXPECT_EQ(st.s[id], t->is_leaf(id) ? 1 : 0);
  EXPECT_FALSE(st.can_stop(*t, 0));
  EXPECT_NO_THROW(st.validate(*t));
  st.s.pop_back();
  EXPECT_ANY_THROW(st.validate(*t));
}

TEST(StopState, AncestorQueries) {
  auto t = nested_tree();
  auto st = StopState::none(*t, 0.3);
  int child = t->node(0).children[0];
  int leaf = t->leaves()[0];
  EXPECT_TRUE(active(*t, st, 0));
  st.s[0] = 1;
  EXPECT_EQ(stopped_ancestor(*t, st, leaf), 0);
  EXPECT_FALSE(active(*t, st, child));
}

TEST(OptDensity, StoppedRootIsUniform) {
  auto t = nested_tree();
  Rng rng(3);
  auto sp = sample_split_probs(uniform_pt(t, 1.0), rng);
  auto st = StopState::none(*t, 0.5);
  st.s[0] = 1;
  auto m = opt_leaf_masses(*t, st, sp);
  double total = t->cell_area(0);
  for (int l = 0; l < t->leaf_count(); ++l) EXPECT_NEAR(m[l], t->cell_area(t->leaves()[l]) / total, 1e-14);
  EXPECT_NEAR(opt_density(*t, st, sp, 0.5, 1.5), 1.0 / total, 1e-14);
}

TEST(OptDensity, MassesSumToOneForAnyStopPattern) {
  auto t = nested_tree();
  Rng rng(4);
  auto sp = sample_split_probs(uniform_pt(t, 1.0), rng);
  for (int rep = 0; rep < 200; ++rep) {
    auto st = StopState::none(*t, 0.5);
    for (int id : t->internal_nodes()) st.s[id] = rng.uniform() < 0.4;
    auto m = opt_leaf_masses(*t, st, sp);
    EXPECT_NEAR(std::accumulate(m.begin(), m.end(), 0.0), 1.0, 1e-12);
  }
}

TEST(ConditionalLoglik, UniformAndSubtreeAgreeWhenSplitsFollowArea) {
  auto t = nested_tree();
  SplitProbs sp;
  sp.tree = t;
  sp.v.assign(t->size(), {});
  for (int id : t->internal_nodes())
    for (int c : t->node(id).children) sp.v[id].push_back(t->cell_area(c) / t->cell_area(id));
  auto st = StopState::none(*t, 0.2);
  std::vector<std::int64_t> counts(t->leaf_count());
  for (std::size_t l = 0; l < counts.size(); ++l) counts[l] = static_cast<std::int64_t>(l % 3);
  for (int id : t->internal_nodes())
    EXPECT_NEAR(uniform_conditional_loglik(*t, id, counts), subtree_conditional_loglik(*t, st, sp, id, counts), 1e-12);
}

TEST(StopUpdate, PosteriorProbabilityMatchesBayesRule) {
  auto t = nested_tree();
  Rng rng(5);
  auto sp = sample_split_probs(uniform_pt(t, 1.0), rng);
  auto st = StopState::none(*t, 0.3);
  std::vector<std::int64_t> counts(t->leaf_count(), 0);
  counts[0] = 3;
  counts[1] = 1;
  int id = t->node(t->leaves()[0]).parent;
  for (int ch : t->node(id).children) ASSERT_TRUE(t->is_leaf(ch));
  double a = std::log(0.3) + uniform_conditional_loglik(*t, id, counts);
  double b = std::log(0.7) + subtree_conditional_loglik(*t, st, sp, id, counts);
  double want = inv_logit(a - b);
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += update_stop_indicator(*t, id, st, sp, counts, rng);
  EXPECT_NEAR(static_cast<double>(hits) / n, want, 4.0 * std::sqrt(want * (1 - want) / n));
}

TEST(StopUpdate, BelowStoppedAncestorDrawsPrior) {
  auto t = nested_tree();
  Rng rng(6);
  auto sp = sample_split_probs(uniform_pt(t, 1.0), rng);
  auto st = StopState::none(*t, 0.25);
  st.s[0] = 1;
  int id = t->node(t->leaves()[0]).parent;
  ASSERT_NE(id, 0);
  std::vector<std::int64_t> counts(t->leaf_count(), 5);
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += update_stop_indicator(*t, id, st, sp, counts, rng);
  EXPECT_NEAR(static_cast<double>(hits) / n, 0.25, 0.006);
}

TEST(StopUpdate, RhoExtremesAndOrdering) {
  auto t = nested_tree();
  Rng rng(7);
  auto sp = sample_split_probs(uniform_pt(t, 1.0), rng);
  std::vector<std::int64_t> counts(t->leaf_count(), 1);
  auto zero = StopState::none(*t, 0.0);
  update_stop_indicators(*t, zero, sp, counts, rng);
  for (int id : t->internal_nodes()) EXPECT_EQ(zero.s[id], 0);
  auto one = StopState::none(*t, 1.0);
  update_stop_indicators(*t, one, sp, counts, rng);
  for (int id : t->internal_nodes()) EXPECT_EQ(one.s[id], 1);
  // Parent before children must be rejected.
  auto st = StopState::none(*t, 0.5);
  std::vector<std::uint8_t> refreshed(t->size(), 0);
  EXPECT_THROW(update_stop_indicator(*t, 0, st, sp, counts, rng, &refreshed), std::logic_error);
}
