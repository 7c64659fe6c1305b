#include "reduced.hpp"

#include <cmath>

#include "ptree/special.hpp"

namespace ptree::testing {

std::unique_ptr<Model> model_from_truth(const ModelSpec& spec, const TruthParams& truth, std::uint64_t seed) {
  Rng rng(seed);
  auto sim = simulate(spec, truth, rng);
  return build_model(spec, sim.data);
}

namespace {

class HlptToy : public Model {
 public:
  HlptToy(int datasets, int n, double sigma, double tau, double mu0) : n_(n) {
    auto grid = SamplingGrid::regular(2);
    tree_ = std::make_shared<const PartitionTree>(build_flp_range(grid, 0, 1));
    std::vector<double> m0(tree_->size(), 0.0);
    m0[0] = mu0;
    h_ = HlptDyadic(tree_, datasets, sigma, tau, m0);
    c0_.assign(datasets, n / 2);
  }
  std::string kind() const override { return "HlptToy"; }
  std::vector<std::string> unknowns() const override { return {"mu", "beta", "pg_aux"}; }
  std::vector<Kernel> kernels() override {
    return {{"hlpt", {"mu", "beta", "pg_aux"}, false, [this](Rng& rng, bool) {
               h_.sweep(counts(), rng);
               return KernelStats{};
             }}};
  }
  std::vector<std::string> trace_names() const override {
    std::vector<std::string> n{"mu"};
    for (int s = 0; s < h_.datasets(); ++s) n.push_back("beta[" + std::to_string(s + 1) + "]");
    for (int s = 0; s < h_.datasets(); ++s) n.push_back("n0[" + std::to_string(s + 1) + "]");
    return n;
  }
  void trace(std::vector<double>& out) const override {
    out.push_back(h_.mu[0]);
    for (const auto& b : h_.beta) out.push_back(b[0]);
    for (auto c : c0_) out.push_back(static_cast<double>(c));
  }
  void initialize(Rng& rng) override { h_.draw_prior(rng); }
  std::unique_ptr<Model> clone() const override { return std::make_unique<HlptToy>(*this); }
  void draw_prior(Rng& rng) override { h_.draw_prior(rng); }
  void regenerate_data(Rng& rng) override {
    for (std::size_t s = 0; s < c0_.size(); ++s) c0_[s] = rng.binomial(n_, inv_logit(h_.beta[s][0]));
  }

 private:
  std::vector<std::vector<std::vector<std::int64_t>>> counts() const {
    std::vector<std::vector<std::vector<std::int64_t>>> c;
    for (auto k : c0_) {
      std::vector<std::vector<std::int64_t>> per(tree_->size());
      per[0] = {k, n_ - k};
      c.push_back(per);
    }
    return c;
  }

  std::shared_ptr<const PartitionTree> tree_;
  HlptDyadic h_;
  std::int64_t n_;
  std::vector<std::int64_t> c0_;
};

}  // namespace

std::unique_ptr<Model> make_hlpt_toy(int datasets, int n, double sigma, double tau, double mu0) {
  return std::make_unique<HlptToy>(datasets, n, sigma, tau, mu0);
}

Reduced reduced_hlpt() { return {"HLPT 2-leaf", {}, make_hlpt_toy(2, 8, 1.0, 1.0, 0.5)}; }

Reduced reduced_cjs(CjsConstraint mode) {
  auto spec = ModelSpec::defaults(ModelKind::CJS, {1, 2, 3});
  spec.constraint = mode;
  TruthParams t;
  t.phi = mode == CjsConstraint::Constant ? std::vector<double>{0.7} : std::vector<double>{0.7, 0.6};
  t.p = 0.5;
  t.releases = {5, 4, 0};
  return {"CJS K=3", spec, model_from_truth(spec, t)};
}

Reduced reduced_rr(bool juvenile_split) {
  auto spec = ModelSpec::defaults(ModelKind::RR, {1, 2, 3});
  spec.U = 1;
  spec.juvenile_split = juvenile_split;
  spec.hyper_lo = 0.5;
  spec.hyper_hi = 5.0;
  TruthParams t;
  t.phi = {0.6, 0.5};
  t.lambda = 0.4;
  t.marked = {6, 5, 4};
  return {juvenile_split ? "RR U=1 split" : "RR U=1", spec, model_from_truth(spec, t)};
}

Reduced reduced_hier() {
  auto spec = ModelSpec::defaults(ModelKind::HierCounts, {1, 2, 3});
  spec.intensity = GammaPrior::from_mean_variance(8.0, 16.0);
  TruthParams t;
  t.laws = {{BivariateLaw::Kind::Laplace, 1.5, 1.0, 2.5, 1.0}, {BivariateLaw::Kind::Laplace, 1.0, 1.0, 3.0, 1.0}};
  t.omegas = {8.0, 8.0};
  t.ps = {0.5, 0.5};
  return {"HierCounts S=2", spec, model_from_truth(spec, t)};
}

Reduced reduced_long() {
  auto spec = ModelSpec::defaults(ModelKind::LongSeriesOPT, {1, 2});
  spec.nested.period_lengths = {2, 2};
  spec.nested.zero_periods = 2;
  spec.intensity = GammaPrior::from_mean_variance(8.0, 16.0);
  spec.rho = 0.3;
  TruthParams t;
  t.laws = {{BivariateLaw::Kind::Normal, 1.0, 1.0, 3.0, 1.0}, {BivariateLaw::Kind::Normal, 1.5, 1.0, 2.5, 1.0}};
  t.omega = 8.0;
  t.p = 0.5;
  return {"LongSeriesOPT [2,2]", spec, model_from_truth(spec, t)};
}

Reduced reduced_joint() {
  auto spec = ModelSpec::defaults(ModelKind::JointCRCD, {1, 2, 3});
  spec.intensity = GammaPrior::from_mean_variance(10.0, 20.0);
  TruthParams t;
  t.law = {BivariateLaw::Kind::Laplace, 1.5, 1.0, 2.5, 1.0};
  t.N = 10;
  t.p_capture = 0.4;
  t.p_count = 0.5;
  return {"JointCRCD K=3", spec, model_from_truth(spec, t)};
}

Reduced reduced_resight() {
  auto spec = ModelSpec::defaults(ModelKind::JointCRCD, {1, 2, 3});
  spec.resight = true;
  spec.intensity = GammaPrior::from_mean_variance(6.0, 12.0);
  spec.intensity_unmarked = GammaPrior::from_mean_variance(6.0, 12.0);
  TruthParams t;
  t.law = {BivariateLaw::Kind::Laplace, 1.5, 1.0, 2.5, 1.0};
  t.N_marked = 6;
  t.N_unmarked = 6;
  t.p_r = 0.4;
  t.p_c = 0.5;
  return {"JointCRCD resight K=3", spec, model_from_truth(spec, t)};
}

std::vector<Reduced> all_reduced() {
  std::vector<Reduced> v;
  v.push_back(reduced_hlpt());
  v.push_back(reduced_cjs());
  v.push_back(reduced_rr(false));
  v.push_back(reduced_rr(true));
  v.push_back(reduced_hier());
  v.push_back(reduced_long());
  v.push_back(reduced_joint());
  v.push_back(reduced_resight());
  return v;
}

}  // namespace ptree::testing
