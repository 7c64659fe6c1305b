#include <benchmark/benchmark.h>

#include <memory>

#include "ptree/likelihoods.hpp"
#include "ptree/mcmc.hpp"
#include "ptree/models.hpp"
#include "ptree/pg.hpp"
#include "ptree/polya_tree.hpp"
#include "ptree/simulate.hpp"

namespace pt = ptree;

namespace {

void BM_PolyaGamma(benchmark::State& state) {
  pt::Rng rng(1);
  pt::PGParams p{state.range(0), static_cast<double>(state.range(1))};
  for (auto _ : state) benchmark::DoNotOptimize(pt::sample_pg(p, rng));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PolyaGamma)->ArgsProduct({{1, 5, 50, 1000}, {0, 2, 8}});

// Large CJS dataset with the latent counts at their simulated truth.
struct CjsFixture {
  pt::FirstLastSummary summary;
  pt::CjsCounts counts;
  explicit CjsFixture(int K) {
    std::vector<double> times;
    for (int k = 1; k <= K; ++k) times.push_back(k);
    pt::TruthParams t;
    t.phi.assign(K - 1, 0.8);
    t.p = 0.5;
    t.releases.assign(K, 5000 / (K - 1));
    t.releases.back() = 0;
    auto spec = pt::ModelSpec::defaults(pt::ModelKind::CJS, times);
    pt::Rng rng(2);
    auto sim = pt::simulate(spec, t, rng);
    summary = pt::summarize_histories(sim.data.histories);
    counts = pt::CjsCounts::zeros(K);
    // Smallest feasible assignment: every individual stays until its last capture.
    for (int k = 1; k <= K; ++k)
      for (int j = k; j <= K; ++j) counts.at(k, j - k + 1) = summary.z[k][j];
  }
};

void BM_CjsLoglik(benchmark::State& state) {
  CjsFixture fx(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(pt::cjs_loglik(fx.summary, fx.counts, 0.5));
}
BENCHMARK(BM_CjsLoglik)->Arg(6)->Arg(12)->Arg(24);

void BM_PtPosteriorDraw(benchmark::State& state) {
  auto tree = std::make_shared<const pt::PartitionTree>(pt::build_eebp(pt::SamplingGrid::regular(static_cast<int>(state.range(0)))));
  auto prior = pt::uniform_pt(tree, 0.5);
  pt::LeafCounts c{std::vector<std::int64_t>(tree->leaf_count(), 3)};
  pt::Rng rng(3);
  for (auto _ : state) {
    auto post = pt::posterior_update(prior, c);
    benchmark::DoNotOptimize(pt::leaf_masses(pt::sample_split_probs(post, rng)));
  }
}
BENCHMARK(BM_PtPosteriorDraw)->Arg(6)->Arg(12);

std::unique_ptr<pt::Model> sweep_model(pt::ModelKind kind) {
  std::vector<double> times{1, 2, 3, 4, 5, 6};
  auto spec = pt::ModelSpec::defaults(kind, times);
  pt::TruthParams t;
  t.phi = {0.8, 0.75, 0.7, 0.75, 0.8};
  t.releases = {900, 450, 300, 200, 150, 0};
  t.N = 500;
  pt::Rng rng(4);
  auto sim = pt::simulate(spec, t, rng);
  return pt::build_model(spec, sim.data);
}

void BM_Sweep(benchmark::State& state) {
  auto kind = static_cast<pt::ModelKind>(state.range(0));
  auto model = sweep_model(kind);
  pt::Rng rng(5);
  model->initialize(rng);
  auto kernels = model->kernels();
  for (int i = 0; i < 200; ++i) pt::sweep(kernels, rng, true, nullptr, i);
  std::int64_t it = 0;
  for (auto _ : state) pt::sweep(kernels, rng, false, nullptr, it++);
  state.SetLabel(pt::model_kind_name(kind));
}
BENCHMARK(BM_Sweep)
    ->Arg(static_cast<int>(pt::ModelKind::CJS))
    ->Arg(static_cast<int>(pt::ModelKind::JointCRCD))
    ->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
