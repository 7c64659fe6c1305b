#include <algorithm>
#include <memory>
#include <stdexcept>

#include "model_util.hpp"
#include "ptree/models.hpp"
#include "ptree/simulate.hpp"

namespace ptree {

namespace {

using detail::idx;

// Count series from S sites over a common grid. Each site has its own latent (f, l) cells and
// logistic split coefficients; shared node means are centred on a Laplace entry x Laplace exit law
// whose four parameters (eta) are themselves updated.
class HierModel final : public Model {
 public:
  HierModel(const ModelSpec& spec, const ModelData& data)
      : spec_(spec), K_(spec.occasions()), S_(static_cast<int>(data.counts.size())),
        tree_(std::make_shared<PartitionTree>(build_eebp(spec.grid(), true))) {
    leaf_ = detail::unit_leaf_table(*tree_, K_ + 1);
    for (int f = 0; f <= K_; ++f)
      for (int l = f + 1; l <= K_; ++l) cells_.emplace_back(f, l);
    eta_ = {spec.entry_prior.location_mean, spec.entry_prior.scale_shape / spec.entry_prior.scale_rate,
            spec.exit_prior.location_mean, spec.exit_prior.scale_shape / spec.exit_prior.scale_rate};
    h_ = HlptDyadic(tree_, S_, spec.hlpt_sigma, spec.hlpt_tau, centre(eta_));
    counts_.assign(S_, std::vector<std::int64_t>(K_ + 1, 0));
    for (int s = 0; s < S_; ++s)
      for (int j = 1; j <= K_; ++j) counts_[s][j] = data.counts[s][j - 1];
    n_.assign(S_, std::vector<std::int64_t>(cells_.size(), 0));
    present_.assign(S_, std::vector<std::int64_t>(K_ + 1, 0));
    omega_.assign(S_, 1.0);
    p_.assign(S_, 0.5);
    movers_.assign(S_, CountMover(CountMover::Mode::Free, 0.5, 0.25));
    refresh_g();
    double span = spec.times.back() - spec.times.front();
    rw_ = AdaptiveRandomWalk({span / 8.0, span / 16.0, span / 8.0, span / 16.0});
  }

  std::string kind() const override { return "HierCounts"; }

  std::vector<std::string> unknowns() const override {
    std::vector<std::string> u;
    for (int s = 1; s <= S_; ++s) u.push_back(idx("n", s));
    u.push_back("beta");
    u.push_back("mu");
    for (int s = 1; s <= S_; ++s) u.push_back(idx("omega", s));
    for (int s = 1; s <= S_; ++s) u.push_back(idx("p", s));
    for (const char* x : {"entry_loc", "entry_scale", "exit_loc", "exit_scale"}) u.push_back(x);
    return u;
  }

  std::vector<Kernel> kernels() override {
    std::vector<Kernel> ks;
    for (int s = 0; s < S_; ++s)
      ks.push_back({idx("counts", s + 1), {idx("n", s + 1)}, true,
                    [this, s](Rng& rng, bool adapt) { return update_site(s, rng, adapt); }});
    ks.push_back({"hlpt", {"beta", "mu"}, false, [this](Rng& rng, bool) {
                    std::vector<std::vector<std::vector<std::int64_t>>> nc;
                    for (int s = 0; s < S_; ++s) nc.push_back(node_counts(*tree_, LeafCounts{leaf_counts(s)}));
                    h_.sweep(nc, rng);
                    refresh_g();
                    return KernelStats{};
                  }});
    std::vector<std::string> om, ps;
    for (int s = 1; s <= S_; ++s) {
      om.push_back(idx("omega", s));
      ps.push_back(idx("p", s));
    }
    ks.push_back({"omega", om, false, [this](Rng& rng, bool) {
                    for (int s = 0; s < S_; ++s) omega_[s] = kernel_intensity(total(s), spec_.intensity, rng);
                    return KernelStats{};
                  }});
    ks.push_back({"detection", ps, false, [this](Rng& rng, bool) {
                    for (int s = 0; s < S_; ++s) {
                      std::int64_t hit = 0, avail = 0;
                      for (int j = 1; j <= K_; ++j) {
                        hit += counts_[s][j];
                        avail += present_[s][j];
                      }
                      p_[s] = kernel_p_capture(hit, avail, rng, spec_.detection);
                    }
                    return KernelStats{};
                  }});
    ks.push_back({"centre", {"entry_loc", "entry_scale", "exit_loc", "exit_scale"}, true,
                  [this](Rng& rng, bool adapt) {
                    auto st = kernel_mh_hyper(eta_, [this](const std::vector<double>& e) { return eta_target(e); },
                                              rw_, rng, adapt);
                    h_.mu0 = centre(eta_);
                    return st;
                  }});
    return ks;
  }

  std::vector<std::string> trace_names() const override {
    std::vector<std::string> n;
    for (int s = 1; s <= S_; ++s) n.push_back(idx("N", s));
    for (int s = 1; s <= S_; ++s) n.push_back(idx("omega", s));
    for (int s = 1; s <= S_; ++s) n.push_back(idx("p", s));
    for (const char* x : {"entry_loc", "entry_scale", "exit_loc", "exit_scale"}) n.push_back(x);
    for (int s = 1; s <= S_; ++s) {
      std::string tag = "_s" + std::to_string(s);
      for (int j = 1; j <= K_; ++j) n.push_back(idx("entry_cdf" + tag, j));
      for (int j = 1; j <= K_; ++j) n.push_back(idx("exit_cdf" + tag, j));
    }
    return n;
  }

  void trace(std::vector<double>& out) const override {
    for (int s = 0; s < S_; ++s) out.push_back(static_cast<double>(total(s)));
    for (double w : omega_) out.push_back(w);
    for (double p : p_) out.push_back(p);
    for (double e : eta_) out.push_back(e);
    for (int s = 0; s < S_; ++s) {
      auto cells = cell_masses(s);
      for (double v : entry_cdf(cells)) out.push_back(v);
      for (double v : exit_cdf(cells)) out.push_back(v);
    }
  }

  std::vector<PlotAxis> plot_axes() const override {
    std::vector<PlotAxis> a;
    for (int s = 1; s <= S_; ++s) {
      std::string tag = "_s" + std::to_string(s);
      a.push_back({"entry_cdf" + tag, spec_.times});
      a.push_back({"exit_cdf" + tag, spec_.times});
    }
    return a;
  }

  void initialize(Rng& rng) override {
    eta_ = {spec_.entry_prior.location_mean, spec_.entry_prior.scale_shape / spec_.entry_prior.scale_rate,
            spec_.exit_prior.location_mean, spec_.exit_prior.scale_shape / spec_.exit_prior.scale_rate};
    h_.mu0 = centre(eta_);
    h_.draw_prior(rng);
    refresh_g();
    for (int s = 0; s < S_; ++s) {
      std::fill(n_[s].begin(), n_[s].end(), 0);
      std::int64_t need = *std::max_element(counts_[s].begin(), counts_[s].end());
      n_[s][cell_index(0, K_)] = need;
      refresh_present(s);
      omega_[s] = static_cast<double>(need) + 1.0;
      p_[s] = 0.5;
    }
  }

  std::unique_ptr<Model> clone() const override { return std::make_unique<HierModel>(*this); }

  void check_state() const override {
    for (int s = 0; s < S_; ++s) {
      auto fresh = present_of(s);
      for (int j = 1; j <= K_; ++j)
        if (fresh[j] != present_[s][j] || counts_[s][j] > fresh[j]) throw std::logic_error("count identity broken");
      for (auto v : n_[s])
        if (v < 0) throw std::logic_error("negative latent count");
    }
  }

  void draw_prior(Rng& rng) override {
    eta_ = {rng.normal(spec_.entry_prior.location_mean, spec_.entry_prior.location_sd),
            rng.gamma(spec_.entry_prior.scale_shape, spec_.entry_prior.scale_rate),
            rng.normal(spec_.exit_prior.location_mean, spec_.exit_prior.location_sd),
            rng.gamma(spec_.exit_prior.scale_shape, spec_.exit_prior.scale_rate)};
    h_.mu0 = centre(eta_);
    h_.draw_prior(rng);
    refresh_g();
    for (int s = 0; s < S_; ++s) {
      omega_[s] = rng.gamma(spec_.intensity.shape, spec_.intensity.rate);
      p_[s] = rng.beta(spec_.detection.a, spec_.detection.b);
      Matrix64 cells = draw_cells(rng.poisson(omega_[s]), cell_masses(s), rng);
      for (std::size_t c = 0; c < cells_.size(); ++c) n_[s][c] = cells[cells_[c].first][cells_[c].second];
      refresh_present(s);
    }
    regenerate_data(rng);
  }

  void regenerate_data(Rng& rng) override {
    for (int s = 0; s < S_; ++s) counts_[s] = simulate_counts(present_[s], p_[s], rng);
  }

 private:
  int cell_index(int f, int l) const {
    int i = 0;
    for (int ff = 0; ff < f; ++ff) i += K_ - ff;
    return i + (l - f - 1);
  }

  std::int64_t total(int s) const {
    std::int64_t t = 0;
    for (auto v : n_[s]) t += v;
    return t;
  }

  // Node logits of the Laplace x Laplace centring law, clamped so far-off windows stay finite.
  std::vector<double> centre(const std::vector<double>& e) const {
    auto mass = product_leaf_masses(
        *tree_, [&](double x) { return laplace_cdf(x, e[0], e[1]); },
        [&](double x) { return laplace_cdf(x, e[2], e[3]); });
    for (double& m : mass) m = std::max(m, 1e-300);
    auto lg = centering_logits(*tree_, mass);
    std::vector<double> mu0(tree_->size(), 0.0);
    for (int id : tree_->internal_nodes()) mu0[id] = std::clamp(lg[id][0], -8.0, 8.0);
    return mu0;
  }

  double eta_target(const std::vector<double>& e) const {
    if (!(e[1] > 0.0) || !(e[3] > 0.0)) return kNegInf;
    const auto& a = spec_.entry_prior;
    const auto& b = spec_.exit_prior;
    double t = normal_logpdf(e[0], a.location_mean, a.location_sd) + gamma_logpdf(e[1], a.scale_shape, a.scale_rate) +
               normal_logpdf(e[2], b.location_mean, b.location_sd) + gamma_logpdf(e[3], b.scale_shape, b.scale_rate);
    auto mu0 = centre(e);
    for (int id : tree_->internal_nodes()) t += normal_logpdf(h_.mu[id], mu0[id], h_.tau);
    return t;
  }

  CellMatrix cell_masses(int s) const {
    CellMatrix m(K_ + 1, std::vector<double>(K_ + 1, 0.0));
    for (auto [f, l] : cells_) m[f][l] = std::exp(logg_[s][leaf_[f][l]]);
    return m;
  }

  std::vector<std::int64_t> leaf_counts(int s) const {
    std::vector<std::int64_t> lc(tree_->leaf_count(), 0);
    for (std::size_t c = 0; c < cells_.size(); ++c) lc[leaf_[cells_[c].first][cells_[c].second]] += n_[s][c];
    return lc;
  }

  void refresh_g() {
    logg_.resize(S_);
    for (int s = 0; s < S_; ++s) {
      auto m = h_.leaf_masses(s);
      logg_[s].resize(m.size());
      for (std::size_t i = 0; i < m.size(); ++i) logg_[s][i] = detail::safe_log(m[i]);
    }
  }

  std::vector<std::int64_t> present_of(int s) const {
    std::vector<std::int64_t> p(K_ + 1, 0);
    for (std::size_t c = 0; c < cells_.size(); ++c)
      for (int j = cells_[c].first + 1; j <= cells_[c].second; ++j) p[j] += n_[s][c];
    return p;
  }

  void refresh_present(int s) { present_[s] = present_of(s); }

  KernelStats update_site(int s, Rng& rng, bool adapt) {
    const double lw = detail::safe_log(omega_[s]);
    auto& present = present_[s];
    auto count_at = [&](int j, std::int64_t n) { return count_loglik(counts_[s][j], n, p_[s]); };
    detail::count_moves(
        movers_[s], std::span<std::int64_t>(n_[s]), 2 * static_cast<int>(cells_.size()), rng, adapt,
        [&](const CountMover::Move& m) {
          auto [f, l] = cells_[m.to];
          double w = logg_[s][leaf_[f][l]] + lw;
          std::int64_t now = n_[s][m.to];
          double d = detail::cell_term(now, w) - detail::cell_term(now - m.delta, w);
          for (int j = f + 1; j <= l; ++j) {
            double t = count_at(j, present[j] + m.delta);
            if (t == kNegInf) return kNegInf;
            d += t - count_at(j, present[j]);
          }
          return d;
        },
        [&](const CountMover::Move& m) {
          auto [f, l] = cells_[m.to];
          for (int j = f + 1; j <= l; ++j) present[j] += m.delta;
        });
    return movers_[s].take_stats();
  }

  ModelSpec spec_;
  int K_, S_;
  std::shared_ptr<PartitionTree> tree_;
  std::vector<std::vector<int>> leaf_;
  std::vector<std::pair<int, int>> cells_;
  HlptDyadic h_;
  std::vector<double> eta_;
  AdaptiveRandomWalk rw_{{1.0, 1.0, 1.0, 1.0}};
  std::vector<std::vector<double>> logg_;
  std::vector<std::vector<std::int64_t>> counts_, n_, present_;
  std::vector<double> omega_, p_;
  std::vector<CountMover> movers_;
};

}  // namespace

std::unique_ptr<Model> make_hier_model(const ModelSpec& spec, const ModelData& data) {
  validate_data(spec, data);
  return std::make_unique<HierModel>(spec, data);
}

}  // namespace ptree
