#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "ptree/likelihoods.hpp"
#include "ptree/special.hpp"

using namespace ptree;
namespace pts = ptree::testing;

namespace {

CaptureHistoryMatrix histories(int K, std::vector<std::vector<std::uint8_t>> rows) {
  CaptureHistoryMatrix h;
  h.K = K;
  h.rows = std::move(rows);
  return h;
}

}  // namespace

TEST(Histories, ValidateRejectsBadRows) {
  EXPECT_NO_THROW(histories(3, {{1, 0, 1}}).validate());
  EXPECT_ANY_THROW(histories(3, {{0, 0, 0}}).validate());
  EXPECT_ANY_THROW(histories(3, {{1, 2, 0}}).validate());
  EXPECT_ANY_THROW(histories(3, {{1, 0}}).validate());
  EXPECT_ANY_THROW(histories(1, {{1}}).validate());
}

TEST(Histories, SummaryCountsFirstLastPairs) {
  auto s = summarize_histories(histories(4, {{1, 0, 1, 0}, {0, 1, 1, 1}, {1, 0, 0, 0}, {0, 0, 0, 1}}));
  EXPECT_EQ(s.individuals(), 4);
  EXPECT_EQ(s.z[1][3], 1);
  EXPECT_EQ(s.z[2][4], 1);
  EXPECT_EQ(s.z[1][1], 1);
  EXPECT_EQ(s.z[4][4], 1);
  EXPECT_EQ(s.f[1], 2);
  EXPECT_EQ(s.c[3], 2);
  EXPECT_EQ(s.captures_by_first[2], 3);
}

TEST(CjsLikelihood, SingleIndividualMatchesHandCalculation) {
  // First caught at 1, stays 3 occasions (present at 1..3), seen at 3: one extra capture among 2 chances.
  auto h = histories(4, {{1, 0, 1, 0}});
  auto n = CjsCounts::zeros(4);
  n.at(1, 3) = 1;
  double p = 0.3;
  EXPECT_NEAR(cjs_loglik(summarize_histories(h), n, p), std::log(p * (1 - p)), 1e-12);
  EXPECT_NEAR(enumeration_oracle_cjs(h, n, p), std::log(p * (1 - p)), 1e-12);
}

TEST(CjsLikelihood, InfeasibleAssignmentIsNegInf) {
  // Last capture at 3 cannot be explained by a stay of 2 occasions.
  auto h = histories(4, {{1, 0, 1, 0}});
  auto n = CjsCounts::zeros(4);
  n.at(1, 2) = 1;
  EXPECT_EQ(cjs_loglik(summarize_histories(h), n, 0.5), kNegInf);
}

TEST(CjsLikelihood, MatchesEnumerationOnRandomInstances) {
  Rng rng(31);
  for (int i = 0; i < 60; ++i) {
    int K = 2 + static_cast<int>(rng.index(3));
    auto [h, n] = pts::random_cjs_instance(rng, K, 1 + static_cast<int>(rng.index(6)));
    double p = rng.uniform();
    EXPECT_NEAR(cjs_loglik(summarize_histories(h), n, p), enumeration_oracle_cjs(h, n, p), 1e-10);
  }
}

TEST(CjsLikelihood, SlicesAddUp) {
  Rng rng(32);
  auto [h, n] = pts::random_cjs_instance(rng, 4, 7);
  auto s = summarize_histories(h);
  double total = 0.0;
  for (int k = 1; k <= 4; ++k) total += cjs_slice_loglik(s, n, k, 0.4);
  EXPECT_NEAR(total, cjs_loglik(s, n, 0.4), 1e-12);
}

TEST(OpenCrLikelihood, MatchesEnumerationOnRandomInstances) {
  Rng rng(33);
  for (int i = 0; i < 60; ++i) {
    int K = 2 + static_cast<int>(rng.index(3));
    auto [h, n] = pts::random_opencr_instance(rng, K, 1 + static_cast<int>(rng.index(6)), static_cast<int>(rng.index(3)));
    double p = rng.uniform();
    EXPECT_NEAR(opencr_loglik(summarize_histories(h), n, p), enumeration_oracle_opencr(h, n, p), 1e-10);
  }
}

TEST(OpenCrLikelihood, NeverCaughtContributeMissedOccasions) {
  // One individual present at occasions 1 and 2 (entry interval 0, exit interval 2), never caught.
  auto n = OpenCounts::zeros(3);
  n.slice[0][0][2] = 1;
  EXPECT_EQ(opencr_present(n, 1), 1);
  EXPECT_EQ(opencr_present(n, 3), 0);
  auto h = histories(3, {});
  EXPECT_NEAR(opencr_loglik(summarize_histories(h), n, 0.25), 2.0 * std::log(0.75), 1e-12);
  EXPECT_EQ(n.grand_total(), 1);
  EXPECT_EQ(n.combined()[0][2], 1);
}

TEST(CountLikelihood, IsBinomial) {
  EXPECT_NEAR(count_loglik(3, 10, 0.2), binomial_logpmf(3, 10, 0.2), 1e-15);
  EXPECT_EQ(count_loglik(11, 10, 0.2), kNegInf);
}

TEST(RingRecovery, ProductBinomialOverPools) {
  // K = 2 marking years, U = 1. counts[k][u_f][u_l].
  std::vector<Matrix64> counts{{{3, 2}, {1, 4}}, {{5, 0}, {0, 2}}};
  Matrix64 R{{2, 1}, {0, 1}};
  double lambda = 0.3;
  double want = binomial_logpmf(2, 3 + 1, lambda) + binomial_logpmf(1, 2 + 4, lambda) + binomial_logpmf(1, 5, lambda);
  EXPECT_NEAR(rr_loglik(R, counts, lambda), want, 1e-12);
  EXPECT_EQ(rr_pool(counts[0], 1, 0, 1), 6);
}

TEST(RingRecovery, RejectsImpossibleMatrices) {
  std::vector<Matrix64> counts{{{1, 0}, {0, 0}}, {{1, 0}, {0, 0}}};
  EXPECT_EQ(rr_loglik({{2, 0}, {0, 0}}, counts, 0.5), kNegInf);  // more recoveries than the pool
  EXPECT_EQ(rr_loglik({{0, 0}, {1, 0}}, counts, 0.5), kNegInf);  // below the diagonal
}

TEST(RingRecovery, SplitUsesJuvenileAndAdultRows) {
  std::vector<Matrix64> counts{{{3, 2}, {1, 4}}};
  Matrix64 Rj{{1}}, Ra{{0}};
  double lambda = 0.4;
  double want = binomial_logpmf(1, 3, lambda) + binomial_logpmf(0, 1, lambda);
  EXPECT_NEAR(rr_loglik_split(Rj, Ra, counts, lambda), want, 1e-12);
}

TEST(HistoryProbability, ConstantSurvivalClosedForm) {
  // P(0110 | first capture at 2) with stay probabilities phi per interval.
  const double phi = 0.8, p = 0.6;
  std::vector<std::vector<double>> v(4);
  for (int k = 1; k <= 4; ++k)
    for (int j = 1; j <= 4 - k; ++j) v[k - 1].push_back(1 - phi);
  double got = cjs_history_probability({0, 1, 1, 0}, v, p);
  double want = phi * p * (1 - phi + phi * (1 - p));
  EXPECT_NEAR(got, want, 1e-14);
}
