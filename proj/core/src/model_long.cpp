#include <algorithm>
#include <map>
#include <memory>
#include <stdexcept>

#include "model_util.hpp"
#include "ptree/models.hpp"
#include "ptree/optional_pt.hpp"
#include "ptree/simulate.hpp"

namespace ptree {

namespace {

using detail::idx;

// A block of logistic coefficients shared by one or more split nodes.
// Entry sites hold one entry-split node; exit sites hold the exit-split siblings below one entry split,
// which share coefficients over exit periods (each member masks the periods it cannot reach).
struct Site {
  bool exit = false;
  std::vector<int> nodes;
  int cats = 0;                              // categories; the last one is the reference
  std::vector<std::vector<bool>> feasible;   // per member
  std::vector<double> mu0, mu;               // cats - 1
  std::vector<std::vector<double>> beta;     // per season, cats - 1
};

// Seasons of unit-level counts. Per season a nested-period tree with logistic splits (HLPT across
// seasons, GP-correlated means across periods) and optional stopping at fine levels.
class LongModel final : public Model {
 public:
  LongModel(const ModelSpec& spec, const ModelData& data)
      : spec_(spec), seasons_(spec.nested.zero_periods), T_(spec.nested.units_per_season()),
        tree_(std::make_shared<PartitionTree>(build_nested_period(spec.nested))) {
    leaf_ = detail::unit_leaf_table(*tree_, T_);
    for (int e = 0; e < T_; ++e)
      for (int x = e; x < T_; ++x) cells_.emplace_back(e, x);
    build_sites();
    stop_template_ = StopState::none(*tree_, spec.rho);
    stop_template_.allowed.assign(tree_->size(), 0);
    for (int id : tree_->internal_nodes()) {
      const Node& n = tree_->node(id);
      stop_template_.allowed[id] = n.entry_level >= 1 && n.exit_level >= 1;
    }
    for (int id : tree_->internal_nodes()) {
      if (!stop_template_.allowed[id]) continue;
      int p = tree_->node(id).parent;
      if (p < 0 || !stop_template_.allowed[p]) top_nodes_.push_back(id);
    }
    stops_.assign(seasons_, stop_template_);
    counts_ = data.counts;
    n_.assign(seasons_, std::vector<std::int64_t>(cells_.size(), 0));
    present_.assign(seasons_, std::vector<std::int64_t>(T_, 0));
    movers_.assign(seasons_, CountMover(CountMover::Mode::Free, 0.5, 0.25));
    refresh_g();
  }

  std::string kind() const override { return "LongSeriesOPT"; }

  std::vector<std::string> unknowns() const override {
    std::vector<std::string> u;
    for (int i = 1; i <= seasons_; ++i) u.push_back(idx("n", i));
    for (const char* x : {"beta", "stops", "omega", "p", "mu"}) u.push_back(x);
    return u;
  }

  std::vector<Kernel> kernels() override {
    std::vector<Kernel> ks;
    for (int i = 0; i < seasons_; ++i)
      ks.push_back({idx("counts", i + 1), {idx("n", i + 1)}, true,
                    [this, i](Rng& rng, bool adapt) { return update_season(i, rng, adapt); }});
    ks.push_back({"splits", {"beta"}, false, [this](Rng& rng, bool) {
                    update_splits(rng);
                    return KernelStats{};
                  }});
    ks.push_back({"stops", {"stops"}, false, [this](Rng& rng, bool) {
                    for (int i = 0; i < seasons_; ++i)
                      update_stop_indicators(*tree_, stops_[i], splits(i), leaf_counts(i), rng);
                    refresh_g();
                    return KernelStats{};
                  }});
    ks.push_back({"omega", {"omega"}, false, [this](Rng& rng, bool) {
                    std::int64_t N = 0;
                    for (int i = 0; i < seasons_; ++i) N += total(i);
                    omega_ = rng.gamma(spec_.intensity.shape + static_cast<double>(N), spec_.intensity.rate + seasons_);
                    return KernelStats{};
                  }});
    ks.push_back({"detection", {"p"}, false, [this](Rng& rng, bool) {
                    std::int64_t hit = 0, avail = 0;
                    for (int i = 0; i < seasons_; ++i)
                      for (int t = 0; t < T_; ++t) {
                        hit += counts_[i][t];
                        avail += present_[i][t];
                      }
                    p_ = kernel_p_capture(hit, avail, rng, spec_.detection);
                    return KernelStats{};
                  }});
    ks.push_back({"gp", {"mu"}, false, [this](Rng& rng, bool) {
                    for (auto& s : sites_) s.mu = gp_mean_update(s.beta, {spec_.gp_sigma0, spec_.gp_length, s.mu0},
                                                                 spec_.hlpt_sigma, rng);
                    return KernelStats{};
                  }});
    return ks;
  }

  std::vector<std::string> trace_names() const override {
    std::vector<std::string> n;
    for (int i = 1; i <= seasons_; ++i) n.push_back(idx("N", i));
    n.push_back("omega");
    n.push_back("p");
    for (int i = 1; i <= seasons_; ++i) n.push_back(idx("stop_top", i));
    for (int i = 1; i <= seasons_; ++i) {
      std::string tag = "_s" + std::to_string(i);
      for (int t = 1; t < T_; ++t) n.push_back(idx("entry_cdf" + tag, t));
      for (int t = 1; t < T_; ++t) n.push_back(idx("exit_cdf" + tag, t));
    }
    return n;
  }

  void trace(std::vector<double>& out) const override {
    for (int i = 0; i < seasons_; ++i) out.push_back(static_cast<double>(total(i)));
    out.push_back(omega_);
    out.push_back(p_);
    for (int i = 0; i < seasons_; ++i) out.push_back(stop_top(i));
    for (int i = 0; i < seasons_; ++i) {
      auto m = cell_masses(i);
      for (double v : entry_cdf(m)) out.push_back(v);
      for (double v : exit_cdf(m)) out.push_back(v);
    }
  }

  std::vector<PlotAxis> plot_axes() const override {
    std::vector<double> units;
    for (int t = 1; t < T_; ++t) units.push_back(t);  // interior unit edges
    std::vector<PlotAxis> a;
    for (int i = 1; i <= seasons_; ++i) {
      std::string tag = "_s" + std::to_string(i);
      a.push_back({"entry_cdf" + tag, units});
      a.push_back({"exit_cdf" + tag, units});
    }
    return a;
  }

  void initialize(Rng& rng) override {
    for (auto& s : sites_) {
      s.mu = s.mu0;
      for (auto& b : s.beta)
        for (std::size_t c = 0; c < b.size(); ++c) b[c] = rng.normal(s.mu[c], spec_.hlpt_sigma);
    }
    stops_.assign(seasons_, stop_template_);
    for (int i = 0; i < seasons_; ++i) {
      std::fill(n_[i].begin(), n_[i].end(), 0);
      std::int64_t need = *std::max_element(counts_[i].begin(), counts_[i].end());
      n_[i][cell_index(0, T_ - 1)] = need;
      refresh_present(i);
    }
    refresh_g();
    std::int64_t N = 0;
    for (int i = 0; i < seasons_; ++i) N += total(i);
    omega_ = static_cast<double>(N) / seasons_ + 1.0;
    p_ = 0.5;
  }

  std::unique_ptr<Model> clone() const override { return std::make_unique<LongModel>(*this); }

  void check_state() const override {
    for (int i = 0; i < seasons_; ++i) {
      stops_[i].validate(*tree_);
      auto fresh = present_of(i);
      for (int t = 0; t < T_; ++t)
        if (fresh[t] != present_[i][t] || counts_[i][t] > fresh[t]) throw std::logic_error("count identity broken");
    }
  }

  void draw_prior(Rng& rng) override {
    for (auto& s : sites_) {
      Eigen::MatrixXd L = gp_covariance(s.mu0.size(), spec_.gp_sigma0, spec_.gp_length).llt().matrixL();
      Eigen::VectorXd z(s.mu0.size());
      for (auto& v : z) v = rng.normal(0.0, 1.0);
      Eigen::VectorXd m = L * z;
      for (std::size_t c = 0; c < s.mu0.size(); ++c) s.mu[c] = s.mu0[c] + m(static_cast<Eigen::Index>(c));
      for (auto& b : s.beta)
        for (std::size_t c = 0; c < b.size(); ++c) b[c] = rng.normal(s.mu[c], spec_.hlpt_sigma);
    }
    for (int i = 0; i < seasons_; ++i) {
      stops_[i] = stop_template_;
      for (int id : tree_->internal_nodes())
        if (stops_[i].can_stop(*tree_, id)) stops_[i].s[id] = rng.uniform() < spec_.rho ? 1 : 0;
    }
    refresh_g();
    omega_ = rng.gamma(spec_.intensity.shape, spec_.intensity.rate);
    p_ = rng.beta(spec_.detection.a, spec_.detection.b);
    for (int i = 0; i < seasons_; ++i) {
      Matrix64 cells = draw_cells(rng.poisson(omega_), cell_masses(i), rng);
      for (std::size_t c = 0; c < cells_.size(); ++c) n_[i][c] = cells[cells_[c].first][cells_[c].second];
      refresh_present(i);
    }
    regenerate_data(rng);
  }

  void regenerate_data(Rng& rng) override {
    for (int i = 0; i < seasons_; ++i) counts_[i] = simulate_counts(present_[i], p_, rng);
  }

 private:
  void build_sites() {
    std::map<std::pair<int, int>, int> exit_key;  // (entry-split parent, level) -> site
    for (int id : tree_->internal_nodes()) {
      const Node& n = tree_->node(id);
      if (n.axis == SplitAxis::Entry) {
        Site s;
        s.nodes = {id};
        s.cats = tree_->arity(id);
        s.feasible = {std::vector<bool>(s.cats, true)};
        sites_.push_back(std::move(s));
        site_of_.emplace(id, static_cast<int>(sites_.size()) - 1);
        continue;
      }
      const int parts = spec_.nested.period_lengths[n.step];
      std::vector<bool> mask(parts, false);
      for (int lab : n.child_labels) mask[lab] = true;
      int parent = n.parent;
      bool shared = parent >= 0 && tree_->node(parent).axis == SplitAxis::Entry;
      auto key = std::make_pair(shared ? parent : -1 - id, n.step);
      auto it = exit_key.find(key);
      if (it == exit_key.end()) {
        Site s;
        s.exit = true;
        s.cats = parts;
        sites_.push_back(std::move(s));
        it = exit_key.emplace(key, static_cast<int>(sites_.size()) - 1).first;
      }
      sites_[it->second].nodes.push_back(id);
      sites_[it->second].feasible.push_back(mask);
      site_of_.emplace(id, it->second);
    }
    // Centring on a normal entry law and a normal exit law, in finest units.
    const double em = spec_.centre_entry_mean >= 0 ? spec_.centre_entry_mean : 0.25 * T_;
    const double es = spec_.centre_entry_sd > 0 ? spec_.centre_entry_sd : T_ / 6.0;
    const double xm = spec_.centre_exit_mean >= 0 ? spec_.centre_exit_mean : 0.75 * T_;
    const double xs = spec_.centre_exit_sd > 0 ? spec_.centre_exit_sd : T_ / 6.0;
    auto mass = product_leaf_masses(
        *tree_, [&](double x) { return normal_cdf((x - em) / es); }, [&](double x) { return normal_cdf((x - xm) / xs); });
    for (double& m : mass) m = std::max(m, 1e-300);
    auto lg = centering_logits(*tree_, mass);
    for (auto& s : sites_) {
      s.mu0.assign(s.cats - 1, 0.0);
      std::vector<int> seen(s.cats - 1, 0);
      for (std::size_t m = 0; m < s.nodes.size(); ++m) {
        const Node& n = tree_->node(s.nodes[m]);
        for (std::size_t c = 0; c + 1 < n.children.size(); ++c) {
          int cat = s.exit ? n.child_labels[c] : static_cast<int>(c);
          // logit against the node's own last child, which is the reference category
          s.mu0[cat] += lg[s.nodes[m]][c];
          ++seen[cat];
        }
      }
      for (int c = 0; c + 1 < s.cats; ++c) s.mu0[c] = std::clamp(seen[c] ? s.mu0[c] / seen[c] : 0.0, -8.0, 8.0);
      s.mu = s.mu0;
      s.beta.assign(seasons_, s.mu0);
    }
  }

  SplitProbs splits(int i) const {
    SplitProbs sp;
    sp.tree = tree_;
    sp.v.assign(tree_->size(), {});
    for (const auto& s : sites_)
      for (std::size_t m = 0; m < s.nodes.size(); ++m) {
        auto p = logistic_split_probs(s.beta[i], s.feasible[m]);
        const Node& n = tree_->node(s.nodes[m]);
        auto& v = sp.v[s.nodes[m]];
        v.clear();
        for (std::size_t c = 0; c < n.children.size(); ++c) v.push_back(p[s.exit ? n.child_labels[c] : c]);
      }
    return sp;
  }

  void update_splits(Rng& rng) {
    for (int i = 0; i < seasons_; ++i) {
      auto nc = node_counts(*tree_, LeafCounts{leaf_counts(i)});
      for (int id : tree_->internal_nodes())
        if (!active(*tree_, stops_[i], id)) std::fill(nc[id].begin(), nc[id].end(), 0);
      for (auto& s : sites_) {
        auto& beta = s.beta[i];
        if (!s.exit) {
          for (int c = 0; c + 1 < s.cats; ++c)
            multinomial_pg_entry_update(c, nc[s.nodes[0]], beta, s.mu[c], spec_.hlpt_sigma, rng);
          continue;
        }
        std::vector<ExitGroup> groups;
        for (std::size_t m = 0; m < s.nodes.size(); ++m) {
          ExitGroup g;
          g.counts.assign(s.cats, 0);
          g.feasible = s.feasible[m];
          const Node& n = tree_->node(s.nodes[m]);
          for (std::size_t c = 0; c < n.children.size(); ++c) g.counts[n.child_labels[c]] = nc[s.nodes[m]][c];
          groups.push_back(std::move(g));
        }
        for (int c = 0; c + 1 < s.cats; ++c) multinomial_pg_exit_update(c, groups, beta, s.mu[c], spec_.hlpt_sigma, rng);
      }
    }
    refresh_g();
  }

  double stop_top(int i) const {
    if (top_nodes_.empty()) return 0.0;
    double s = 0.0;
    for (int id : top_nodes_) s += stops_[i].s[id];
    return s / static_cast<double>(top_nodes_.size());
  }

  int cell_index(int e, int x) const {
    int k = 0;
    for (int ee = 0; ee < e; ++ee) k += T_ - ee;
    return k + (x - e);
  }

  std::int64_t total(int i) const {
    std::int64_t t = 0;
    for (auto v : n_[i]) t += v;
    return t;
  }

  CellMatrix cell_masses(int i) const {
    CellMatrix m(T_, std::vector<double>(T_, 0.0));
    for (auto [e, x] : cells_) m[e][x] = std::exp(logg_[i][cell_index(e, x)]);
    return m;
  }

  std::vector<std::int64_t> leaf_counts(int i) const {
    std::vector<std::int64_t> lc(tree_->leaf_count(), 0);
    for (std::size_t c = 0; c < cells_.size(); ++c) lc[leaf_[cells_[c].first][cells_[c].second]] += n_[i][c];
    return lc;
  }

  // Log mass per unit cell (leaves of the nested tree are unit pairs).
  void refresh_g() {
    logg_.assign(seasons_, std::vector<double>(cells_.size(), kNegInf));
    for (int i = 0; i < seasons_; ++i) {
      auto m = opt_leaf_masses(*tree_, stops_[i], splits(i));
      for (std::size_t c = 0; c < cells_.size(); ++c)
        logg_[i][c] = detail::safe_log(m[leaf_[cells_[c].first][cells_[c].second]]);
    }
  }

  std::vector<std::int64_t> present_of(int i) const {
    std::vector<std::int64_t> p(T_, 0);
    for (std::size_t c = 0; c < cells_.size(); ++c)
      for (int t = cells_[c].first; t <= cells_[c].second; ++t) p[t] += n_[i][c];
    return p;
  }

  void refresh_present(int i) { present_[i] = present_of(i); }

  KernelStats update_season(int i, Rng& rng, bool adapt) {
    const double lw = detail::safe_log(omega_);
    auto& present = present_[i];
    auto count_at = [&](int t, std::int64_t n) { return count_loglik(counts_[i][t], n, p_); };
    detail::count_moves(
        movers_[i], std::span<std::int64_t>(n_[i]), 2 * static_cast<int>(cells_.size()), rng, adapt,
        [&](const CountMover::Move& m) {
          auto [e, x] = cells_[m.to];
          double w = logg_[i][m.to] + lw;
          std::int64_t now = n_[i][m.to];
          double d = detail::cell_term(now, w) - detail::cell_term(now - m.delta, w);
          if (d == kNegInf || std::isnan(d)) return kNegInf;
          for (int t = e; t <= x; ++t) {
            double c = count_at(t, present[t] + m.delta);
            if (c == kNegInf) return kNegInf;
            d += c - count_at(t, present[t]);
          }
          return d;
        },
        [&](const CountMover::Move& m) {
          auto [e, x] = cells_[m.to];
          for (int t = e; t <= x; ++t) present[t] += m.delta;
        });
    return movers_[i].take_stats();
  }

  ModelSpec spec_;
  int seasons_, T_;
  std::shared_ptr<PartitionTree> tree_;
  std::vector<std::vector<int>> leaf_;
  std::vector<std::pair<int, int>> cells_;
  std::vector<Site> sites_;
  std::map<int, int> site_of_;
  StopState stop_template_;
  std::vector<StopState> stops_;
  std::vector<int> top_nodes_;
  std::vector<std::vector<std::int64_t>> counts_, n_, present_;
  std::vector<std::vector<double>> logg_;
  std::vector<CountMover> movers_;
  double omega_ = 1.0, p_ = 0.5;
};

}  // namespace

std::unique_ptr<Model> make_long_model(const ModelSpec& spec, const ModelData& data) {
  validate_data(spec, data);
  return std::make_unique<LongModel>(spec, data);
}

}  // namespace ptree
