#include <gtest/gtest.h>

#include "ptree/replicate.hpp"

using namespace ptree;

TEST(CjsTieMap, ClassCountsPerConstraint) {
  const int K = 5;
  int internal = K * (K - 1) / 2;
  EXPECT_EQ(cjs_tie_map(K, CjsConstraint::Constant).class_count(), 1);
  EXPECT_EQ(cjs_tie_map(K, CjsConstraint::Age).class_count(), K - 1);
  EXPECT_EQ(cjs_tie_map(K, CjsConstraint::Time).class_count(), K - 1);
  EXPECT_EQ(cjs_tie_map(K, CjsConstraint::Unconstrained).class_count(), internal);
}

TEST(CjsTieMap, AgeTiesSameStepAcrossTrees) {
  auto tie = cjs_tie_map(4, CjsConstraint::Age);
  for (int cls = 0; cls < tie.class_count(); ++cls) {
    const auto& m = tie.members(cls);
    int step = tie.tree(m[0].tree).node(m[0].node).step;
    for (auto r : m) EXPECT_EQ(tie.tree(r.tree).node(r.node).step, step);
  }
}

TEST(CjsTieMap, TimeTiesCalendarInterval) {
  auto tie = cjs_tie_map(4, CjsConstraint::Time);
  for (int cls = 0; cls < tie.class_count(); ++cls) {
    const auto& m = tie.members(cls);
    auto key = [&](NodeRef r) { return r.tree + 1 + tie.tree(r.tree).node(r.node).step; };
    for (auto r : m) EXPECT_EQ(key(r), key(m[0]));
  }
}

TEST(TieMap, RejectsLeafAndArityMismatch) {
  auto a = std::make_shared<const PartitionTree>(build_up(SamplingGrid::regular(3)));
  auto b = std::make_shared<const PartitionTree>(build_rr_partition(2));
  TieMap tie({a, b});
  EXPECT_THROW(tie.tie({0, a->leaves()[0]}, {0, 0}), std::invalid_argument);
  EXPECT_EQ(tie.class_of({0, a->leaves()[0]}), -1);
  EXPECT_NO_THROW(tie.validate());
}

TEST(TieMap, PooledCountsAndBroadcastAreAdjoint) {
  auto tie = cjs_tie_map(4, CjsConstraint::Constant);
  std::vector<std::vector<std::vector<std::int64_t>>> per(tie.forest().size());
  std::int64_t total0 = 0;
  for (std::size_t t = 0; t < per.size(); ++t) {
    per[t].assign(tie.tree(static_cast<int>(t)).size(), {});
    for (int id : tie.tree(static_cast<int>(t)).internal_nodes()) {
      per[t][id] = {static_cast<std::int64_t>(t + 1), static_cast<std::int64_t>(id)};
      total0 += static_cast<std::int64_t>(t + 1);
    }
  }
  auto pooled = pooled_counts(tie, per);
  ASSERT_EQ(pooled.size(), 1u);
  EXPECT_EQ(pooled[0][0], total0);
  auto b = broadcast_splits(tie, {{0.3, 0.7}});
  for (std::size_t t = 0; t < b.size(); ++t)
    for (int id : tie.tree(static_cast<int>(t)).internal_nodes()) EXPECT_EQ(b[t][id], (std::vector<double>{0.3, 0.7}));
}

TEST(OpenPopulationTies, SlicesAndExitChainsValidate) {
  auto g = SamplingGrid::regular(4);
  EXPECT_NO_THROW(eebp_exit_tie_map(g).validate());
  EXPECT_NO_THROW(eebp_slice_tie_map(g).validate());
  auto slices = eebp_slice_tie_map(g);
  EXPECT_EQ(slices.forest().size(), 4u);
  int internal = 0;
  for (int t = 0; t < 4; ++t) internal += static_cast<int>(slices.tree(t).internal_nodes().size());
  EXPECT_LT(slices.class_count(), internal);
}

TEST(RingRecoveryTies, OneClassPerNode) {
  auto tie = rr_slice_tie_map(5, 3);
  auto one = build_rr_partition(3);
  EXPECT_EQ(tie.class_count(), static_cast<int>(one.internal_nodes().size()));
  for (int cls = 0; cls < tie.class_count(); ++cls) EXPECT_EQ(tie.members(cls).size(), 5u);
}

TEST(CjsConstraintNames, RoundTrip) {
  for (auto c : {CjsConstraint::Constant, CjsConstraint::Age, CjsConstraint::Time, CjsConstraint::Unconstrained})
    EXPECT_EQ(parse_cjs_constraint(cjs_constraint_name(c)), c);
  EXPECT_ANY_THROW(parse_cjs_constraint("sideways"));
}
