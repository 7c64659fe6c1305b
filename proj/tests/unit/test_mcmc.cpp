#include <gtest/gtest.h>

#include <cmath>

#include "ptree/diagnostics.hpp"
#include "ptree/mcmc.hpp"
#include "reduced.hpp"

using namespace ptree;
namespace pts = ptree::testing;

namespace {

// x ~ N(1, 4) by exact Gibbs; y by a random-walk MH step on N(0, 1). Optionally fails at one iteration.
struct Toy : Model {
  double x = 0.0, y = 0.0;
  std::int64_t fail_at = -1;
  std::int64_t calls = 0;
  std::string kind() const override { return "toy"; }
  std::vector<std::string> unknowns() const override { return {"x", "y"}; }
  std::vector<Kernel> kernels() override {
    return {{"gibbs_x", {"x"}, false,
             [this](Rng& rng, bool) {
               if (calls++ == fail_at) throw std::runtime_error("boom");
               x = rng.normal(1.0, 2.0);
               return KernelStats{1, 1};
             }},
            {"rw_y", {"y"}, true, [this](Rng& rng, bool) {
               double p = y + rng.normal();
               bool ok = std::log(rng.uniform()) < 0.5 * (y * y - p * p);
               if (ok) y = p;
               return KernelStats{1, ok ? 1 : 0};
             }}};
  }
  std::vector<std::string> trace_names() const override { return {"x", "y"}; }
  void trace(std::vector<double>& out) const override { out = {x, y}; }
  void initialize(Rng& rng) override { x = y = rng.normal(); }
  std::unique_ptr<Model> clone() const override { return std::make_unique<Toy>(*this); }
};

RunConfig small_run(int threads = 1) {
  RunConfig rc;
  rc.iterations = 3000;
  rc.burn_in = 1000;
  rc.chains = 3;
  rc.seed = 99;
  rc.threads = threads;
  return rc;
}

}  // namespace

TEST(Engine, ShapesAndTargets) {
  Toy toy;
  auto d = run(toy, small_run());
  ASSERT_EQ(d.chains.size(), 3u);
  EXPECT_EQ(d.retained(), 2000u);
  EXPECT_EQ(d.names, (std::vector<std::string>{"x", "y"}));
  EXPECT_NEAR(d.mean("x"), 1.0, 0.1);
  EXPECT_NEAR(d.mean("y"), 0.0, 0.15);
  EXPECT_EQ(d.kernel_stats("gibbs_x").proposals, 3 * 2000);
  EXPECT_EQ(d.provenance.seed, 99u);
}

TEST(Engine, ThinKeepsEveryNth) {
  Toy toy;
  auto rc = small_run();
  rc.thin = 4;
  EXPECT_EQ(run(toy, rc).retained(), 500u);
}

TEST(Engine, DeterministicForSeedAndThreadCount) {
  Toy toy;
  auto a = run(toy, small_run(1)), b = run(toy, small_run(1)), c = run(toy, small_run(3));
  for (std::size_t ch = 0; ch < 3; ++ch) {
    EXPECT_EQ(a.chains[ch].rows, b.chains[ch].rows);
    EXPECT_EQ(a.chains[ch].rows, c.chains[ch].rows);
  }
  EXPECT_NE(a.chains[0].rows, a.chains[1].rows);
  auto rc = small_run();
  rc.seed = 100;
  EXPECT_NE(run(toy, rc).chains[0].rows, a.chains[0].rows);
}

TEST(Engine, RealModelDeterministicAcrossThreads) {
  auto r = pts::reduced_joint();
  RunConfig rc;
  rc.iterations = 400;
  rc.burn_in = 100;
  rc.chains = 2;
  rc.seed = 5;
  rc.threads = 1;
  auto a = run(*r.model, rc);
  rc.threads = 2;
  auto b = run(*r.model, rc);
  for (std::size_t ch = 0; ch < 2; ++ch) EXPECT_EQ(a.chains[ch].rows, b.chains[ch].rows);
}

TEST(Engine, KernelFailureNamesIterationAndKernel) {
  Toy toy;
  toy.fail_at = 7;
  try {
    run(toy, small_run());
    FAIL() << "expected McmcError";
  } catch (const McmcError& e) {
    EXPECT_EQ(e.kernel(), "gibbs_x");
    EXPECT_EQ(e.iteration(), 7);
    EXPECT_NE(std::string(e.what()).find("boom"), std::string::npos);
  }
}

TEST(Engine, RejectsBadRunConfig) {
  Toy toy;
  auto rc = small_run();
  rc.burn_in = rc.iterations;
  EXPECT_THROW(run(toy, rc), std::invalid_argument);
  rc = small_run();
  rc.chains = 0;
  EXPECT_THROW(rc.validate(), std::invalid_argument);
}

TEST(Diagnostics, EssOfIndependentAndAutocorrelatedSeries) {
  Rng rng(1);
  const int n = 20000;
  std::vector<double> iid(n), ar(n);
  double prev = 0.0;
  for (int i = 0; i < n; ++i) {
    iid[i] = rng.normal();
    prev = 0.9 * prev + std::sqrt(1 - 0.81) * rng.normal();
    ar[i] = prev;
  }
  EXPECT_NEAR(effective_sample_size(iid).value / n, 1.0, 0.15);
  EXPECT_NEAR(effective_sample_size(ar).value / n, 0.1 / 1.9, 0.02);
  EXPECT_TRUE(effective_sample_size(std::vector<double>(100, 2.0)).degenerate);
}

TEST(Diagnostics, RhatFlagsShiftedChains) {
  Rng rng(2);
  std::vector<std::vector<double>> same(4, std::vector<double>(2000)), shifted = same;
  for (int c = 0; c < 4; ++c)
    for (int i = 0; i < 2000; ++i) {
      same[c][i] = rng.normal();
      shifted[c][i] = rng.normal() + (c == 0 ? 3.0 : 0.0);
    }
  EXPECT_NEAR(split_rhat(same), 1.0, 0.01);
  EXPECT_GT(split_rhat(shifted), 1.1);
  EXPECT_EQ(split_rhat({std::vector<double>(10, 1.0), std::vector<double>(10, 1.0)}), 1.0);
}

TEST(Diagnostics, QuantileType7) {
  EXPECT_DOUBLE_EQ(quantile({4.0, 1.0, 3.0, 2.0}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.25), 2.0);
  EXPECT_DOUBLE_EQ(quantile_sorted({1.0, 2.0}, 1.0), 2.0);
}

TEST(Diagnostics, SummariesFromDraws) {
  Toy toy;
  auto d = run(toy, small_run());
  auto diag = diagnose(d);
  const auto& x = diag.param("x");
  EXPECT_NEAR(x.mean, 1.0, 0.1);
  EXPECT_NEAR(x.sd, 2.0, 0.1);
  EXPECT_LT(x.q025, x.q50);
  EXPECT_LT(x.q50, x.q975);
  EXPECT_GT(x.ess, 1000.0);
  EXPECT_LT(x.rhat, 1.05);
  ASSERT_EQ(diag.kernels.size(), 2u);
  EXPECT_TRUE(diag.kernels[1].metropolis);
  EXPECT_GT(diag.kernels[1].rate, 0.3);
  EXPECT_LT(diag.kernels[1].rate, 0.9);
  EXPECT_ANY_THROW(diag.param("missing"));
}
