#include <gtest/gtest.h>

#include <numeric>

#include "ptree/simulate.hpp"

using namespace ptree;

namespace {

double total(const CellMatrix& m) {
  double s = 0.0;
  for (const auto& r : m) s += std::accumulate(r.begin(), r.end(), 0.0);
  return s;
}

}  // namespace

TEST(CellProbabilities, NormalisedAndOrdered) {
  auto axis = SamplingGrid::regular(5).axis();
  for (auto kind : {BivariateLaw::Kind::Laplace, BivariateLaw::Kind::Normal}) {
    BivariateLaw law{kind, 2.0, 1.0, 4.0, 1.0};
    auto all = cell_probabilities(axis, law, false);
    auto avail = cell_probabilities(axis, law, true);
    EXPECT_NEAR(total(all), 1.0, 1e-12);
    EXPECT_NEAR(total(avail), 1.0, 1e-12);
    for (std::size_t e = 0; e < all.size(); ++e) {
      EXPECT_EQ(avail[e][e], 0.0);
      for (std::size_t x = 0; x < e; ++x) EXPECT_EQ(all[e][x], 0.0);
    }
    auto ec = entry_cdf(all), xc = exit_cdf(all);
    for (std::size_t j = 1; j < ec.size(); ++j) {
      EXPECT_GE(ec[j], ec[j - 1]);
      EXPECT_GE(ec[j], xc[j]);  // cannot have left before entering
    }
  }
}

TEST(CellProbabilities, RingRecoveryRowsFollowSurvival) {
  auto m = rr_cell_probabilities({0.5, 0.7, 0.8, 0.9}, 2);
  EXPECT_NEAR(total(m), 1.0, 1e-12);
}

TEST(Draws, CellsAndCounts) {
  Rng rng(1);
  CellMatrix probs{{0.2, 0.3}, {0.0, 0.5}};
  auto cells = draw_cells(1000, probs, rng);
  EXPECT_EQ(cells[0][0] + cells[0][1] + cells[1][0] + cells[1][1], 1000);
  EXPECT_EQ(cells[1][0], 0);
  Matrix64 iv{{0, 2, 3}, {0, 0, 4}, {0, 0, 1}};  // interval cells for K = 2
  auto present = present_by_occasion(iv);
  EXPECT_EQ(present[1], 5);  // f = 0 < 1 <= l
  EXPECT_EQ(present[2], 3 + 4);
  auto c = simulate_counts(present, 0.5, rng);
  for (std::size_t j = 1; j < present.size(); ++j) EXPECT_LE(c[j], present[j]);
  Matrix64 units{{1, 2}, {0, 3}};
  auto pu = present_by_unit(units);
  EXPECT_EQ(pu[0], 3);
  EXPECT_EQ(pu[1], 5);
}

TEST(Draws, CjsHistoriesRespectStays) {
  Rng rng(2);
  auto n = CjsCounts::zeros(4);
  n.at(1, 2) = 30;
  n.at(3, 1) = 10;
  auto h = simulate_cjs_histories(n, 0.5, rng);
  EXPECT_EQ(h.individuals(), 40);
  auto s = summarize_histories(h);
  EXPECT_EQ(s.f[1], 30);
  EXPECT_EQ(s.f[3], 10);
  for (int j = 3; j <= 4; ++j) EXPECT_EQ(s.z[1][j], 0);
  EXPECT_EQ(s.z[3][3], 10);
}

TEST(Simulate, EveryKindValidatesAndIsReproducible) {
  std::vector<ModelSpec> specs;
  specs.push_back(ModelSpec::defaults(ModelKind::CJS, {1, 2, 3, 4}));
  specs.push_back(ModelSpec::defaults(ModelKind::JointCRCD, {1, 2, 3, 4}));
  auto rs = ModelSpec::defaults(ModelKind::JointCRCD, {1, 2, 3, 4});
  rs.resight = true;
  specs.push_back(rs);
  auto rr = ModelSpec::defaults(ModelKind::RR, {1, 2, 3, 4});
  rr.U = 2;
  specs.push_back(rr);
  auto rj = rr;
  rj.juvenile_split = true;
  specs.push_back(rj);
  specs.push_back(ModelSpec::defaults(ModelKind::HierCounts, {1, 2, 3, 4}));
  auto ls = ModelSpec::defaults(ModelKind::LongSeriesOPT, {1, 2});
  ls.nested.period_lengths = {2, 2};
  ls.nested.zero_periods = 2;  // seasons
  specs.push_back(ls);

  TruthParams t;
  t.phi = {0.8, 0.7, 0.6};
  t.releases = {50, 30, 20, 0};
  t.marked = {100, 100, 100, 100};
  t.N_marked = 30;
  t.N_unmarked = 60;
  t.laws = {{BivariateLaw::Kind::Laplace, 1.5, 1.0, 3.5, 1.0}, {BivariateLaw::Kind::Normal, 2.0, 1.0, 3.0, 1.0}};
  t.omegas = {40.0, 60.0};
  t.ps = {0.5, 0.4};
  t.omega = 50.0;
  for (const auto& spec : specs) {
    SCOPED_TRACE(model_kind_name(spec.kind));
    TruthParams tt = t;
    if (spec.kind == ModelKind::RR) tt.phi = {0.5, 0.7, 0.8, 0.8};
    Rng a(7), b(7);
    auto s1 = simulate(spec, tt, a);
    auto s2 = simulate(spec, tt, b);
    EXPECT_NO_THROW(validate_data(spec, s1.data));
    EXPECT_EQ(s1.data.histories.rows, s2.data.histories.rows);
    EXPECT_EQ(s1.data.counts, s2.data.counts);
    EXPECT_EQ(s1.truth.values, s2.truth.values);
    EXPECT_FALSE(s1.truth.values.empty());
    auto model = build_model(spec, s1.data);
    auto names = model->trace_names();
    for (const auto& [k, v] : s1.truth.values)
      EXPECT_NE(std::find(names.begin(), names.end(), k), names.end()) << k;
  }
}

TEST(Simulate, CjsUsesRequestedFirstCaptures) {
  auto spec = ModelSpec::defaults(ModelKind::CJS, {1, 2, 3, 4});
  TruthParams t;
  t.phi = {0.8, 0.7, 0.6};
  t.releases = {50, 30, 20, 0};
  Rng rng(8);
  auto s = summarize_histories(simulate(spec, t, rng).data.histories);
  EXPECT_EQ(s.f[1], 50);
  EXPECT_EQ(s.f[2], 30);
  EXPECT_EQ(s.f[3], 20);
}
