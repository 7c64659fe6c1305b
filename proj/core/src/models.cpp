#include "ptree/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "model_util.hpp"

namespace ptree {

const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::CJS: return "CJS";
    case ModelKind::JointCRCD: return "JointCRCD";
    case ModelKind::RR: return "RR";
    case ModelKind::HierCounts: return "HierCounts";
    case ModelKind::LongSeriesOPT: return "LongSeriesOPT";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& s) {
  for (ModelKind k : {ModelKind::CJS, ModelKind::JointCRCD, ModelKind::RR, ModelKind::HierCounts,
                      ModelKind::LongSeriesOPT})
    if (s == model_kind_name(k)) return k;
  throw std::invalid_argument("unknown model kind '" + s + "'");
}

ModelSpec ModelSpec::defaults(ModelKind kind, std::vector<double> times) {
  ModelSpec s;
  s.kind = kind;
  s.times = std::move(times);
  if (kind == ModelKind::LongSeriesOPT) {
    s.intensity = {40.0, 0.2};
    s.nested.period_lengths = {3, 4};
    s.nested.zero_periods = 3;
  }
  if (kind == ModelKind::HierCounts && s.times.size() >= 2) {
    double t1 = s.times.front(), tK = s.times.back();
    double mid = 0.5 * (t1 + tK);
    double pad = (tK - t1) / static_cast<double>(s.times.size() - 1);
    s.entry_prior = laplace_window_prior(t1 - pad, mid);
    s.exit_prior = laplace_window_prior(mid, tK + pad);
  }
  return s;
}

void ModelSpec::validate() const {
  auto pos = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be positive");
  };
  pos(detection.a, "detection prior a");
  pos(detection.b, "detection prior b");
  pos(split.a, "split prior a");
  pos(split.b, "split prior b");
  pos(dirichlet_alpha, "dirichlet_alpha");
  pos(intensity.shape, "intensity shape");
  pos(intensity.rate, "intensity rate");
  pos(intensity_unmarked.shape, "unmarked intensity shape");
  pos(intensity_unmarked.rate, "unmarked intensity rate");
  pos(rr_exit_concentration, "rr exit concentration");
  pos(hlpt_sigma, "hlpt sigma");
  pos(hlpt_tau, "hlpt tau");
  pos(gp_sigma0, "gp sigma0");
  pos(gp_length, "gp length scale");
  if (!(hyper_lo > 0.0 && hyper_lo < hyper_hi)) throw std::invalid_argument("need 0 < hyper_lo < hyper_hi");
  if (U < 1) throw std::invalid_argument("U must be >= 1");
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must be in [0, 1]");
  if (kind == ModelKind::LongSeriesOPT) {
    nested.validate();
  } else {
    SamplingGrid g(times);  // throws on bad times
    if (g.occasions() < 2) throw std::invalid_argument("need at least two occasions");
  }
}

namespace {

[[noreturn]] void fail(const std::string& what) { throw DataError(what); }

void check_binary_rows(const std::vector<std::vector<std::uint8_t>>& rows, int K, const std::string& what) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<int>(rows[i].size()) != K)
      fail(what + " row " + std::to_string(i + 1) + " has " + std::to_string(rows[i].size()) + " cells, expected " +
           std::to_string(K));
    for (int j = 0; j < K; ++j)
      if (rows[i][j] > 1)
        fail(what + " row " + std::to_string(i + 1) + ", column " + std::to_string(j + 1) + " is not 0/1");
  }
}

void check_histories(const CaptureHistoryMatrix& h, int K) {
  if (h.K != K) fail("capture histories have " + std::to_string(h.K) + " occasions, expected " + std::to_string(K));
  check_binary_rows(h.rows, K, "capture history");
  for (std::size_t i = 0; i < h.rows.size(); ++i)
    if (std::none_of(h.rows[i].begin(), h.rows[i].end(), [](auto v) { return v != 0; }))
      fail("capture history row " + std::to_string(i + 1) + " has no capture");
}

void check_series(const std::vector<std::int64_t>& c, std::size_t len, const std::string& what) {
  if (c.size() != len)
    fail(what + " has " + std::to_string(c.size()) + " entries, expected " + std::to_string(len));
  for (std::size_t j = 0; j < c.size(); ++j)
    if (c[j] < 0) fail(what + " entry " + std::to_string(j + 1) + " is negative");
}

void check_recoveries(const Matrix64& R, const std::vector<std::int64_t>& m, int K, int U, const std::string& what) {
  if (static_cast<int>(R.size()) != K) fail(what + " has " + std::to_string(R.size()) + " rows, expected " + std::to_string(K));
  check_series(m, static_cast<std::size_t>(K), what + " markings");
  for (int k = 0; k < K; ++k) {
    if (static_cast<int>(R[k].size()) != K) fail(what + " row " + std::to_string(k + 1) + " has the wrong length");
    std::int64_t total = 0;
    for (int c = 0; c < K; ++c) {
      auto v = R[k][c];
      std::string at = what + " cell (" + std::to_string(k + 1) + ", " + std::to_string(c + 1) + ")";
      if (v < 0) fail(at + " is negative");
      if (c < k && v != 0) fail(at + " is below the diagonal but nonzero");
      if (c - k > U && v != 0) fail(at + " is beyond the longevity bound U");
      total += v;
    }
    if (total > m[k]) fail(what + " row " + std::to_string(k + 1) + " recovers more than were marked");
  }
}

}  // namespace

void validate_data(const ModelSpec& spec, const ModelData& d) {
  spec.validate();
  const int K = spec.occasions();
  switch (spec.kind) {
    case ModelKind::CJS:
      check_histories(d.histories, K);
      if (d.histories.rows.empty()) fail("no capture histories");
      break;
    case ModelKind::JointCRCD:
      if (d.counts.size() != 1) fail("joint model needs exactly one count series");
      check_series(d.counts[0], static_cast<std::size_t>(K), "count series");
      if (spec.resight) {
        if (d.resight_1.size() != d.resight_2.size()) fail("resight channel histories differ in row count");
        check_binary_rows(d.resight_1, K, "channel-1 history");
        check_binary_rows(d.resight_2, K, "channel-2 history");
        for (std::size_t i = 0; i < d.resight_1.size(); ++i) {
          bool any = false;
          for (int j = 0; j < K; ++j) any = any || d.resight_1[i][j] || d.resight_2[i][j];
          if (!any) fail("resighted individual " + std::to_string(i + 1) + " is never seen");
        }
      } else {
        check_histories(d.histories, K);
      }
      break;
    case ModelKind::RR:
      if (spec.juvenile_split) {
        check_recoveries(d.recoveries_juvenile, d.marked_juvenile, K, spec.U, "juvenile recoveries");
        check_recoveries(d.recoveries_adult, d.marked_adult, K, spec.U, "adult recoveries");
      } else {
        check_recoveries(d.recoveries, d.marked, K, spec.U, "recoveries");
      }
      break;
    case ModelKind::HierCounts:
      if (d.counts.empty()) fail("hierarchical model needs at least one count series");
      for (std::size_t s = 0; s < d.counts.size(); ++s)
        check_series(d.counts[s], static_cast<std::size_t>(K), "count series " + std::to_string(s + 1));
      break;
    case ModelKind::LongSeriesOPT: {
      const int T = spec.nested.units_per_season();
      if (static_cast<int>(d.counts.size()) != spec.nested.zero_periods)
        fail("long series needs " + std::to_string(spec.nested.zero_periods) + " seasons, got " +
             std::to_string(d.counts.size()));
      for (std::size_t s = 0; s < d.counts.size(); ++s)
        check_series(d.counts[s], static_cast<std::size_t>(T), "season " + std::to_string(s + 1));
      break;
    }
  }
}

std::unique_ptr<Model> build_model(const ModelSpec& spec, const ModelData& data) {
  std::unique_ptr<Model> m;
  switch (spec.kind) {
    case ModelKind::CJS: m = make_cjs_model(spec, data); break;
    case ModelKind::JointCRCD: m = spec.resight ? make_resight_model(spec, data) : make_joint_model(spec, data); break;
    case ModelKind::RR: m = make_rr_model(spec, data); break;
    case ModelKind::HierCounts: m = make_hier_model(spec, data); break;
    case ModelKind::LongSeriesOPT: m = make_long_model(spec, data); break;
  }
  audit_kernels(*m);
  return m;
}

HlptDyadic::HlptDyadic(std::shared_ptr<const PartitionTree> t, int datasets, double sigma_, double tau_,
                       std::vector<double> mu0_)
    : tree(std::move(t)), sigma(sigma_), tau(tau_), mu0(std::move(mu0_)) {
  const int n = tree->size();
  if (static_cast<int>(mu0.size()) != n) throw std::invalid_argument("one centering value per node required");
  for (int id : tree->internal_nodes())
    if (tree->arity(id) != 2) throw std::invalid_argument("dyadic HLPT needs a binary tree");
  mu = mu0;
  beta.assign(datasets, mu0);
  omega.assign(datasets, std::vector<double>(n, 0.0));
}

void HlptDyadic::draw_prior(Rng& rng) {
  for (int id : tree->internal_nodes()) {
    mu[id] = rng.normal(mu0[id], tau);
    for (auto& b : beta) b[id] = rng.normal(mu[id], sigma);
  }
}

void HlptDyadic::sweep(const std::vector<std::vector<std::vector<std::int64_t>>>& counts, Rng& rng) {
  const int S = datasets();
  std::vector<double> kappa(S), om(S);
  for (int id : tree->internal_nodes()) {
    for (int s = 0; s < S; ++s) {
      const auto& c = counts[s][id];
      std::int64_t n = c[0] + c[1];
      omega[s][id] = gibbs_pg_aux(n, beta[s][id], rng, pg);
      kappa[s] = static_cast<double>(c[0]) - 0.5 * static_cast<double>(n);
      om[s] = omega[s][id];
    }
    auto m = collapsed_mean_moments(kappa, om, mu0[id], tau, sigma);
    mu[id] = rng.normal(m.mean, std::sqrt(m.variance));
    for (int s = 0; s < S; ++s) {
      const auto& c = counts[s][id];
      beta[s][id] = gibbs_beta_dyadic(c[0], c[0] + c[1], omega[s][id], mu[id], sigma, rng);
    }
  }
}

std::vector<double> HlptDyadic::leaf_masses(int s) const {
  SplitProbs sp;
  sp.tree = tree;
  sp.v.assign(tree->size(), {});
  for (int id : tree->internal_nodes()) {
    double p0 = inv_logit(beta[s][id]);
    sp.v[id] = {p0, 1.0 - p0};
  }
  return ptree::leaf_masses(sp);
}

}  // namespace ptree
