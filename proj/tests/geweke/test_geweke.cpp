#include <gtest/gtest.h>

#include "geweke.hpp"
#include "reduced.hpp"

namespace ptree::testing {
namespace {

constexpr double kZ = 4.0;

void expect_geweke(const Reduced& r, GewekeOptions opt = {}) {
  auto res = geweke(*r.model, opt);
  EXPECT_LT(res.max_abs_z, kZ) << r.name << ": " << res.report();
}

TEST(Geweke, HlptTwoLeaf) { expect_geweke(reduced_hlpt()); }
TEST(Geweke, CjsAgeK3) { expect_geweke(reduced_cjs(CjsConstraint::Age)); }
TEST(Geweke, CjsConstantK3) { expect_geweke(reduced_cjs(CjsConstraint::Constant)); }
TEST(Geweke, RingRecoveryU1) { expect_geweke(reduced_rr(false)); }
TEST(Geweke, RingRecoveryU1JuvenileSplit) { expect_geweke(reduced_rr(true)); }
// The centring random walk mixes slowly; batch means need a longer chain to be honest.
TEST(Geweke, HierCountsS2) {
  GewekeOptions opt;
  opt.forward_draws = opt.chain_sweeps = 100000;
  expect_geweke(reduced_hier(), opt);
}
TEST(Geweke, LongSeriesTwoPeriods) { expect_geweke(reduced_long()); }
TEST(Geweke, JointK3) { expect_geweke(reduced_joint()); }
TEST(Geweke, ResightK3) { expect_geweke(reduced_resight()); }

// A deliberately wrong kernel must be caught: the harness is only useful if it has power.
TEST(Geweke, DetectsBrokenKernel) {
  class Broken : public Model {
   public:
    std::string kind() const override { return "Broken"; }
    std::vector<std::string> unknowns() const override { return {"p"}; }
    std::vector<Kernel> kernels() override {
      return {{"p", {"p"}, false, [this](Rng& rng, bool) {
                 // Beta(1 + y, 1 + n - y) is right; dropping the prior pseudo-count biases p upward.
                 p_ = rng.beta(2.0 + static_cast<double>(y_), 1.0 + static_cast<double>(n_ - y_));
                 return KernelStats{};
               }}};
    }
    std::vector<std::string> trace_names() const override { return {"p", "y"}; }
    void trace(std::vector<double>& out) const override {
      out.push_back(p_);
      out.push_back(static_cast<double>(y_));
    }
    void initialize(Rng& rng) override { p_ = rng.uniform(); }
    std::unique_ptr<Model> clone() const override { return std::make_unique<Broken>(*this); }
    void draw_prior(Rng& rng) override { p_ = rng.uniform(); }
    void regenerate_data(Rng& rng) override { y_ = rng.binomial(n_, p_); }

   private:
    double p_ = 0.5;
    std::int64_t n_ = 10, y_ = 5;
  };
  Broken b;
  GewekeOptions opt;
  opt.forward_draws = opt.chain_sweeps = 10000;
  EXPECT_GT(geweke(b, opt).max_abs_z, kZ);
}

}  // namespace
}  // namespace ptree::testing
