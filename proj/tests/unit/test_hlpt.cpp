#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "ptree/hlpt.hpp"
#include "ptree/models.hpp"
#include "ptree/special.hpp"

using namespace ptree;
namespace pts = ptree::testing;

namespace {

// Posterior mean of beta under beta ~ N(mu, sigma^2) and n0 successes of n with P = logistic(beta).
double beta_posterior_mean(std::int64_t n0, std::int64_t n, double mu, double sigma) {
  auto w = [&](double u, bool first_moment) {
    double b = mu + sigma * std::log(u / (1.0 - u));
    double jac = sigma / (u * (1.0 - u));
    double lp = static_cast<double>(n0) * -log1p_exp(-b) + static_cast<double>(n - n0) * -log1p_exp(b) +
                normal_logpdf(b, mu, sigma);
    return std::exp(lp) * jac * (first_moment ? b : 1.0);
  };
  return pts::integrate01([&](double u) { return w(u, true); }) / pts::integrate01([&](double u) { return w(u, false); });
}

}  // namespace

TEST(LogisticSplit, LastChildIsReference) {
  auto p = logistic_split_probs(std::vector<double>{0.0, 0.0});
  for (double v : p) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
  std::vector<double> beta{std::log(0.2 / 0.5), std::log(0.3 / 0.5)};
  p = logistic_split_probs(beta);
  EXPECT_NEAR(p[0], 0.2, 1e-14);
  EXPECT_NEAR(p[1], 0.3, 1e-14);
  EXPECT_NEAR(p[2], 0.5, 1e-14);
}

TEST(LogisticSplit, InfeasibleCategoriesGetZero) {
  std::vector<double> beta{1.0, -2.0, 0.5};
  auto p = logistic_split_probs(beta, {true, false, true, true});
  EXPECT_EQ(p[1], 0.0);
  EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-14);
  EXPECT_NEAR(p[0] / p[3], std::exp(1.0), 1e-12);
}

TEST(LogisticSplit, ExtremeCoefficientsStayFinite) {
  auto p = logistic_split_probs(std::vector<double>{800.0, -800.0});
  EXPECT_NEAR(p[0], 1.0, 1e-15);
  EXPECT_TRUE(std::isfinite(p[1]) && std::isfinite(p[2]));
}

TEST(DyadicGibbs, NoDataGivesPrior) {
  auto m = beta_dyadic_moments(0, 0, 0.0, 0.4, 1.5);
  EXPECT_DOUBLE_EQ(m.mean, 0.4);
  EXPECT_DOUBLE_EQ(m.variance, 2.25);
  Rng rng(1);
  EXPECT_EQ(gibbs_pg_aux(0, 3.0, rng), 0.0);
  EXPECT_THROW(beta_dyadic_moments(5, 3, 1.0, 0.0, 1.0), std::invalid_argument);
}

TEST(DyadicGibbs, AugmentedChainHitsPosteriorMean) {
  const std::int64_t n0 = 7, n = 10;
  const double mu = -0.3, sigma = 1.2;
  Rng rng(21);
  double beta = 0.0, s = 0.0;
  const int iters = 200000;
  for (int i = 0; i < iters; ++i) {
    double w = gibbs_pg_aux(n, beta, rng);
    beta = gibbs_beta_dyadic(n0, n, w, mu, sigma, rng);
    s += beta;
  }
  EXPECT_NEAR(s / iters, beta_posterior_mean(n0, n, mu, sigma), 0.01);
}

TEST(MultinomialGibbs, ThreeWayChainHitsConditionalMean) {
  // beta[1] fixed at 0.5; beta[0] updated one-vs-rest. Oracle: 1-D quadrature of the multinomial likelihood.
  std::vector<std::int64_t> counts{4, 2, 3};
  const double mu = 0.0, sigma = 1.0;
  auto logpost = [&](double b0) {
    double l0 = b0, l1 = 0.5, lz = log_sum_exp(std::vector<double>{l0, l1, 0.0});
    return 4 * (l0 - lz) + 2 * (l1 - lz) + 3 * (0.0 - lz) + normal_logpdf(b0, mu, sigma);
  };
  auto f = [&](double u, bool first) {
    double b = 4.0 * std::log(u / (1.0 - u));
    return std::exp(logpost(b)) * 4.0 / (u * (1.0 - u)) * (first ? b : 1.0);
  };
  double want = pts::integrate01([&](double u) { return f(u, true); }) / pts::integrate01([&](double u) { return f(u, false); });
  Rng rng(5);
  std::vector<double> beta{0.0, 0.5};
  double s = 0.0;
  const int iters = 200000;
  for (int i = 0; i < iters; ++i) s += multinomial_pg_entry_update(0, counts, beta, mu, sigma, rng);
  EXPECT_NEAR(s / iters, want, 0.01);
  EXPECT_EQ(beta[1], 0.5);
}

TEST(MultinomialGibbs, RejectsShapeMismatch) {
  std::vector<std::int64_t> counts{1, 2};
  std::vector<double> beta{0.0, 0.0};
  EXPECT_THROW(multinomial_entry_moments(0, counts, beta, 1.0, 0.0, 1.0), std::invalid_argument);
}

TEST(GaussianProcess, CovarianceIsSquaredExponential) {
  auto k = gp_covariance(4, 2.0, 1.5);
  for (int a = 0; a < 4; ++a) {
    EXPECT_DOUBLE_EQ(k(a, a), 4.0);
    for (int b = 0; b < 4; ++b) EXPECT_DOUBLE_EQ(k(a, b), k(b, a));
  }
  EXPECT_NEAR(k(0, 1), 4.0 * std::exp(-1.0 / 2.25), 1e-14);
  EXPECT_THROW(gp_covariance(3, 0.0, 1.0), std::invalid_argument);
}

TEST(GaussianProcess, OneDimensionalPosteriorIsNormalNormal) {
  GPHyper h{2.0, 1.0, {0.5}};
  Eigen::VectorXd m;
  Eigen::MatrixXd c;
  const double sigma = 0.7;
  gp_mean_posterior({{1.0}, {2.0}, {0.0}}, h, sigma, m, c);
  double prec = 1.0 / 4.0 + 3.0 / 0.49;
  EXPECT_NEAR(c(0, 0), 1.0 / prec, 1e-12);
  EXPECT_NEAR(m(0), (0.5 / 4.0 + 3.0 / 0.49) / prec, 1e-12);
}

TEST(CollapsedMean, IgnoresEmptyDatasets) {
  std::vector<double> kappa{0.0, 2.0}, omega{0.0, 4.0};
  auto m = collapsed_mean_moments(kappa, omega, 0.0, 1.0, 0.5);
  // One informative dataset: pseudo-observation kappa/omega with variance 1/omega + sigma^2.
  double v = 0.25 + 0.25;
  EXPECT_NEAR(m.variance, 1.0 / (1.0 + 1.0 / v), 1e-14);
  EXPECT_NEAR(m.mean, m.variance * 0.5 / v, 1e-14);
}

TEST(Centering, LaplaceCdfAndLogits) {
  EXPECT_DOUBLE_EQ(laplace_cdf(2.0, 2.0, 1.0), 0.5);
  EXPECT_NEAR(laplace_cdf(3.0, 2.0, 1.0), 1.0 - 0.5 * std::exp(-1.0), 1e-15);
  auto tree = build_eebp(SamplingGrid::regular(4));
  auto g0 = product_leaf_masses(tree, [](double x) { return laplace_cdf(x, 1.5, 1.0); },
                                [](double x) { return laplace_cdf(x, 3.5, 1.0); });
  EXPECT_NEAR(std::accumulate(g0.begin(), g0.end(), 0.0), 1.0, 1e-12);
  auto logits = centering_logits(tree, g0);
  auto nm = node_mass(tree, g0);
  for (int id : tree.internal_nodes()) {
    const auto& ch = tree.node(id).children;
    ASSERT_EQ(logits[id].size(), ch.size() - 1);
    auto p = logistic_split_probs(logits[id]);
    for (std::size_t c = 0; c < ch.size(); ++c) EXPECT_NEAR(p[c], nm[ch[c]] / nm[id], 1e-10);
  }
}

TEST(Centering, WindowPriorHitsRequestedMass) {
  auto p = laplace_window_prior(2.0, 6.0, 0.9);
  EXPECT_NEAR(laplace_window_mass(p, 2.0, 6.0), 0.9, 1e-4);
  EXPECT_THROW(laplace_window_prior(3.0, 1.0), std::invalid_argument);
}

TEST(AdaptiveWalk, SamplesNormalTargetAndAdapts) {
  AdaptiveRandomWalk rw({10.0}, 0.3);
  Rng rng(8);
  std::vector<double> x{0.0};
  auto target = [](const std::vector<double>& v) { return -0.5 * v[0] * v[0]; };
  for (int i = 0; i < 5000; ++i) rw.sweep(x, target, rng, true);
  EXPECT_LT(rw.scales()[0], 10.0);
  double s = 0.0, s2 = 0.0;
  const int n = 100000;
  std::int64_t p0 = rw.proposals(), a0 = rw.accepted();
  for (int i = 0; i < n; ++i) {
    rw.sweep(x, target, rng, false);
    s += x[0];
    s2 += x[0] * x[0];
  }
  EXPECT_NEAR(s / n, 0.0, 0.05);
  EXPECT_NEAR(s2 / n, 1.0, 0.05);
  double rate = static_cast<double>(rw.accepted() - a0) / static_cast<double>(rw.proposals() - p0);
  EXPECT_NEAR(rate, 0.3, 0.1);
}

TEST(HlptDyadic, PriorDrawsAreDistributions) {
  auto tree = std::make_shared<const PartitionTree>(build_flp(SamplingGrid::regular(4), 1));
  HlptDyadic h(tree, 3, 0.5, 1.0, std::vector<double>(tree->size(), 0.0));
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    h.draw_prior(rng);
    for (int s = 0; s < 3; ++s) {
      auto m = h.leaf_masses(s);
      EXPECT_NEAR(std::accumulate(m.begin(), m.end(), 0.0), 1.0, 1e-12);
    }
  }
}
