#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "ptree/partition.hpp"

using namespace ptree;

namespace {

std::vector<std::pair<std::string, PartitionTree>> sample_trees() {
  auto g = SamplingGrid::regular(5);
  NestedPeriodSpec np;
  np.period_lengths = {3, 4};
  np.zero_periods = 2;
  return {{"flp", build_flp(g, 2)},       {"blp", build_blp(g, 3)},  {"up", build_up(g)},
          {"eebp", build_eebp(g)},        {"eebp_avail", build_eebp(g, true)},
          {"slice", build_eebp_slice(g, 3)}, {"bivlp", build_bivlp(g)}, {"rr", build_rr_partition(4)},
          {"nested", build_nested_period(np)}};
}

}  // namespace

TEST(SamplingGrid, IntervalsIncludeInfiniteTails) {
  auto g = SamplingGrid::regular(4, 10.0, 2.0);
  EXPECT_EQ(g.occasions(), 4);
  EXPECT_EQ(g.intervals(), 5);
  EXPECT_DOUBLE_EQ(g.time(1), 10.0);
  EXPECT_DOUBLE_EQ(g.time(4), 16.0);
  auto ax = g.axis();
  EXPECT_EQ(ax.units(), 5);
  EXPECT_FALSE(ax.lower(0).finite());
  EXPECT_FALSE(ax.upper(4).finite());
  EXPECT_TRUE(std::isinf(ax.width(0)));
  EXPECT_DOUBLE_EQ(ax.width(2), 2.0);
  EXPECT_EQ(ax.unit_of(11.0), 1);
  EXPECT_EQ(ax.unit_of(-100.0), 0);
  EXPECT_THROW(ax.unit_of(12.0), PartitionError);  // on an edge
  EXPECT_THROW(ax.midpoint(0), std::exception);
}

TEST(SamplingGrid, RejectsUnsortedTimes) { EXPECT_ANY_THROW(SamplingGrid({1.0, 3.0, 2.0})); }

TEST(PartitionTree, EveryRuleValidates) {
  for (auto& [name, t] : sample_trees()) {
    SCOPED_TRACE(name);
    EXPECT_NO_THROW(t.validate());
    EXPECT_GT(t.leaf_count(), 1);
  }
}

TEST(PartitionTree, ChildrenPartitionParentUnits) {
  for (auto& [name, t] : sample_trees()) {
    SCOPED_TRACE(name);
    for (int id : t.internal_nodes()) {
      auto parent = t.units_of(id);
      std::multiset<std::pair<int, int>> joined;
      for (int c : t.node(id).children)
        for (auto u : t.units_of(c)) joined.insert(u);
      std::multiset<std::pair<int, int>> whole(parent.begin(), parent.end());
      EXPECT_EQ(whole, joined);
      EXPECT_EQ(t.node(id).child_labels.size(), t.node(id).children.size());
    }
  }
}

TEST(PartitionTree, LeavesCoverEachUnitOnce) {
  for (auto& [name, t] : sample_trees()) {
    SCOPED_TRACE(name);
    std::set<std::pair<int, int>> seen;
    for (int l = 0; l < t.leaf_count(); ++l) {
      int id = t.leaves()[l];
      EXPECT_EQ(t.node(id).leaf_index, l);
      for (auto [e, x] : t.units_of(id)) {
        EXPECT_TRUE(seen.insert({e, x}).second);
        EXPECT_EQ(t.leaf_of_unit(e, x), id);
      }
    }
    for (auto u : t.units_of(0)) EXPECT_TRUE(seen.count(u));
  }
}

TEST(PartitionTree, BottomUpOrderVisitsDescendantsFirst) {
  for (auto& [name, t] : sample_trees()) {
    SCOPED_TRACE(name);
    auto order = t.internal_nodes_bottom_up();
    std::vector<int> pos(t.size(), -1);
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
    for (int id : order) {
      if (t.node(id).parent >= 0) {
        EXPECT_LT(pos[id], pos[t.node(id).parent]);
      }
    }
  }
}

TEST(PartitionTree, PathsFindTheirNodes) {
  for (auto& [name, t] : sample_trees()) {
    SCOPED_TRACE(name);
    for (int id = 0; id < t.size(); ++id) {
      auto found = t.find(t.node(id).path);
      ASSERT_TRUE(found.has_value());
      EXPECT_EQ(*found, id);
      EXPECT_EQ(static_cast<int>(t.node(id).path.size()), t.node(id).depth);
    }
  }
}

TEST(Flp, PeelsOneIntervalPerLevel) {
  auto g = SamplingGrid::regular(4);
  auto t = build_flp(g, 1);  // intervals 1..4
  EXPECT_EQ(t.leaf_count(), 4);
  EXPECT_EQ(t.height(), 3);
  for (int id : t.internal_nodes()) {
    EXPECT_EQ(t.arity(id), 2);
    EXPECT_EQ(t.node(id).step, t.node(id).depth);
    EXPECT_EQ(t.units_of(t.node(id).children[0]).size(), 1u);  // first child is the earliest interval
  }
}

TEST(Blp, MirrorsFlp) {
  auto g = SamplingGrid::regular(4);
  auto f = build_flp_range(g, 1, 4), b = build_blp_range(g, 1, 4);
  EXPECT_EQ(f.leaf_count(), b.leaf_count());
  EXPECT_EQ(f.height(), b.height());
  auto last = b.units_of(b.node(0).children[1]);
  ASSERT_EQ(last.size(), 1u);
  EXPECT_EQ(last[0].first, 4);
}

TEST(Up, SplitsRootIntoEveryInterval) {
  auto t = build_up(SamplingGrid::regular(7));  // 8 intervals
  EXPECT_EQ(t.leaf_count(), 8);
  EXPECT_EQ(t.height(), 1);
  EXPECT_EQ(t.arity(0), 8);
}

TEST(Bivariate, OrderedTreesExcludeExitBeforeEntry) {
  auto g = SamplingGrid::regular(4);
  for (const auto& t : {build_eebp(g), build_bivlp(g)}) {
    EXPECT_EQ(t.dimension(), 2);
    EXPECT_TRUE(t.ordered());
    for (auto [e, x] : t.units_of(0)) EXPECT_LE(e, x);
    EXPECT_EQ(t.units_of(0).size(), 15u);  // 5 intervals: 5 * 6 / 2
  }
  auto avail = build_eebp(g, true);
  for (auto [e, x] : avail.units_of(0)) EXPECT_LT(e, x);
}

TEST(Bivariate, SliceRestrictsEntryAndExit) {
  auto g = SamplingGrid::regular(5);
  auto t = build_eebp_slice(g, 3);
  for (auto [e, x] : t.units_of(0)) {
    EXPECT_LE(e, 2);
    EXPECT_GE(x, 3);
  }
}

TEST(Bivariate, CellOfLocatesPoints) {
  auto g = SamplingGrid::regular(4);
  auto t = build_eebp(g);
  auto idx = cell_of(t, 1.5, 3.5);
  auto id = t.find(idx);
  ASSERT_TRUE(id.has_value());
  EXPECT_TRUE(t.is_leaf(*id));
  EXPECT_EQ(*id, t.leaf_of_unit(1, 3));
}

TEST(Univariate, CellOfLocatesPoints) {
  auto t = build_up(SamplingGrid::regular(3));
  auto id = t.find(cell_of(t, 2.5));
  ASSERT_TRUE(id.has_value());
  EXPECT_EQ(*id, t.leaf_of_unit(2));
}

TEST(NestedPeriod, UnitCountMatchesSeason) {
  NestedPeriodSpec np;
  np.period_lengths = {3, 4};
  np.zero_periods = 2;
  EXPECT_EQ(np.units_per_season(), 12);
  auto t = build_nested_period(np);
  EXPECT_EQ(t.entry_axis().units(), 12);
  NestedPeriodSpec bad;
  bad.period_lengths = {};
  EXPECT_ANY_THROW(bad.validate());
}

TEST(RingRecovery, CoversSquare) {
  auto t = build_rr_partition(3);
  EXPECT_EQ(t.units_of(0).size(), 16u);
}

TEST(Areas, CellAreaSumsUnitAreas) {
  auto g = SamplingGrid::regular(4);
  auto t = build_bivlp(g);
  for (int id = 0; id < t.size(); ++id) {
    double s = 0.0;
    for (auto [e, x] : t.units_of(id)) s += t.unit_area(e, x);
    if (std::isfinite(s))
      EXPECT_NEAR(t.cell_area(id), s, 1e-12);
    else
      EXPECT_TRUE(std::isinf(t.cell_area(id)));
  }
}
