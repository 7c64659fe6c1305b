#include <algorithm>
#include <memory>
#include <stdexcept>

#include "model_util.hpp"
#include "ptree/models.hpp"
#include "ptree/simulate.hpp"

namespace ptree {

namespace {

using detail::idx;

// Ring recovery: per marking year k a (U+1) x (U+1) latent matrix over (u_f, u_l), one shared law.
// LOS chain splits V_L ~ Beta(a, b) with (a, b) uniform on a box; within-LOS exit splits are Dirichlet.
// With juvenile_split, row 0 is the juvenile row and rows 1..U the adults; row totals are observed.
class RrModel final : public Model {
 public:
  RrModel(const ModelSpec& spec, const ModelData& data)
      : spec_(spec), K_(spec.occasions()), U_(spec.U), tree_(std::make_shared<PartitionTree>(build_rr_partition(spec.U))) {
    leaf_ = detail::unit_leaf_table(*tree_, U_ + 1);
    for (int id : tree_->internal_nodes()) {
      if (tree_->node(id).axis == SplitAxis::Los) los_nodes_.push_back(id);
      else exit_nodes_.push_back(id);
    }
    std::sort(los_nodes_.begin(), los_nodes_.end(), [&](int a, int b) { return tree_->node(a).step < tree_->node(b).step; });
    splits_.tree = tree_;
    splits_.v.assign(tree_->size(), {});
    for (int id : tree_->internal_nodes()) splits_.v[id].assign(tree_->arity(id), 1.0 / tree_->arity(id));
    groups_ = spec.juvenile_split ? 2 : 1;
    for (int uf = 0; uf <= U_; ++uf)
      for (int ul = 0; ul <= U_; ++ul) cells_[group_of(uf)].emplace_back(uf, ul);
    set_data(data);
    n_.assign(K_, Matrix64(U_ + 1, std::vector<std::int64_t>(U_ + 1, 0)));
    refresh_g();
  }

  std::string kind() const override { return "RR"; }

  std::vector<std::string> unknowns() const override {
    std::vector<std::string> u;
    for (int k = 1; k <= K_; ++k) u.push_back(idx("n", k));
    u.push_back("a_hyper");
    u.push_back("b_hyper");
    for (std::size_t i = 0; i < los_nodes_.size(); ++i) u.push_back(idx("V_los", static_cast<int>(i) + 1));
    for (std::size_t i = 0; i < exit_nodes_.size(); ++i) u.push_back(idx("W_exit", static_cast<int>(i) + 1));
    u.push_back("lambda");
    return u;
  }

  std::vector<Kernel> kernels() override {
    std::vector<Kernel> ks;
    for (int k = 0; k < K_; ++k)
      ks.push_back({idx("counts", k + 1), {idx("n", k + 1)}, true,
                    [this, k](Rng& rng, bool adapt) { return update_slice(k, rng, adapt); }});
    std::vector<std::string> los{"a_hyper", "b_hyper"};
    for (std::size_t i = 0; i < los_nodes_.size(); ++i) los.push_back(idx("V_los", static_cast<int>(i) + 1));
    ks.push_back({"los", los, true, [this](Rng& rng, bool adapt) { return update_los(rng, adapt); }});
    if (!exit_nodes_.empty()) {
      std::vector<std::string> ex;
      for (std::size_t i = 0; i < exit_nodes_.size(); ++i) ex.push_back(idx("W_exit", static_cast<int>(i) + 1));
      ks.push_back({"exit_splits", ex, false, [this](Rng& rng, bool) {
                      auto nc = node_counts(*tree_, LeafCounts{leaf_counts()});
                      for (int id : exit_nodes_) {
                        std::vector<double> alpha(tree_->arity(id), exit_alpha(id));
                        splits_.v[id] = kernel_dirichlet(nc[id], alpha, rng);
                      }
                      refresh_g();
                      return KernelStats{};
                    }});
    }
    ks.push_back({"lambda", {"lambda"}, false, [this](Rng& rng, bool) {
                    std::int64_t rec = 0, pool = 0;
                    for (int k = 0; k < K_; ++k)
                      for (int g = 0; g < groups_; ++g)
                        for (int j = 0; j <= horizon(k); ++j) {
                          rec += rec_[g][k][k + j];
                          pool += pool_at(k, g, j);
                        }
                    lambda_ = kernel_lambda(rec, pool, rng, spec_.detection);
                    return KernelStats{};
                  }});
    return ks;
  }

  std::vector<std::string> trace_names() const override {
    std::vector<std::string> n;
    for (int a = 0; a < 2 * U_; ++a) n.push_back(idx("phi", a));
    for (int a = 1; a <= 2 * U_; ++a) n.push_back(idx("survival", a));
    for (const char* x : {"lambda", "a_hyper", "b_hyper"}) n.push_back(x);
    return n;
  }

  void trace(std::vector<double>& out) const override {
    auto phi = survival_probs();
    for (double p : phi) out.push_back(p);
    double alive = 1.0;
    for (double p : phi) out.push_back(alive *= p);
    out.push_back(lambda_);
    out.push_back(hyper_[0]);
    out.push_back(hyper_[1]);
  }

  std::vector<PlotAxis> plot_axes() const override {
    std::vector<double> ages;
    for (int a = 1; a <= 2 * U_; ++a) ages.push_back(a);
    return {{"survival", ages}};
  }

  void initialize(Rng& rng) override {
    for (int k = 0; k < K_; ++k) {
      auto& s = n_[k];
      for (auto& r : s) std::fill(r.begin(), r.end(), 0);
      for (int g = 0; g < groups_; ++g) {
        const int row = g == 0 ? 0 : 1;
        const int park = g == 0 && groups_ == 2 ? 0 : U_;
        std::int64_t placed = 0;
        for (int j = 0; j <= horizon(k); ++j) {
          s[row][j] += rec_[g][k][k + j];
          placed += rec_[g][k][k + j];
        }
        s[park][U_] += marked_[g][k] - placed;
      }
    }
    hyper_ = {1.0, 1.0};
    for (int id : los_nodes_) set_dyadic(id, rng.beta(hyper_[0], hyper_[1]));
    for (int id : exit_nodes_) {
      std::vector<double> alpha(tree_->arity(id), exit_alpha(id));
      splits_.v[id] = rng.dirichlet(alpha);
    }
    refresh_g();
    lambda_ = 0.5;
  }

  std::unique_ptr<Model> clone() const override { return std::make_unique<RrModel>(*this); }

  void check_state() const override {
    for (int k = 0; k < K_; ++k) {
      for (int g = 0; g < groups_; ++g) {
        std::int64_t t = 0;
        for (auto [uf, ul] : cells_[g]) {
          if (n_[k][uf][ul] < 0) throw std::logic_error("negative latent count");
          t += n_[k][uf][ul];
        }
        if (t != marked_[g][k]) throw std::logic_error("latent slice total differs from markings");
        for (int j = 0; j <= horizon(k); ++j)
          if (rec_[g][k][k + j] > pool_at(k, g, j)) throw std::logic_error("recoveries exceed their pool");
      }
    }
    for (double p : survival_probs())
      if (!(p >= 0.0 && p <= 1.0)) throw std::logic_error("survival outside [0, 1]");
  }

  void draw_prior(Rng& rng) override {
    hyper_ = {uniform_hyper(rng), uniform_hyper(rng)};
    for (int id : los_nodes_) set_dyadic(id, rng.beta(hyper_[0], hyper_[1]));
    for (int id : exit_nodes_) {
      std::vector<double> alpha(tree_->arity(id), exit_alpha(id));
      splits_.v[id] = rng.dirichlet(alpha);
    }
    refresh_g();
    lambda_ = rng.beta(spec_.detection.a, spec_.detection.b);
    CellMatrix probs(U_ + 1, std::vector<double>(U_ + 1, 0.0));
    for (int uf = 0; uf <= U_; ++uf)
      for (int ul = 0; ul <= U_; ++ul) probs[uf][ul] = std::exp(logg_[leaf_[uf][ul]]);
    for (int k = 0; k < K_; ++k) n_[k] = draw_cells(marked_[0][k] + (groups_ == 2 ? marked_[1][k] : 0), probs, rng);
    regenerate_data(rng);
  }

  void regenerate_data(Rng& rng) override {
    if (groups_ == 2) {
      // Juvenile/adult totals are row sums of n, which the count kernel holds fixed; redrawing only the
      // recoveries would freeze them. Redraw (n, data) jointly given the splits instead.
      CellMatrix probs(U_ + 1, std::vector<double>(U_ + 1, 0.0));
      for (int uf = 0; uf <= U_; ++uf)
        for (int ul = 0; ul <= U_; ++ul) probs[uf][ul] = std::exp(logg_[leaf_[uf][ul]]);
      for (int k = 0; k < K_; ++k) n_[k] = draw_cells(marked_[0][k] + marked_[1][k], probs, rng);
    }
    for (int g = 0; g < groups_; ++g) {
      for (int k = 0; k < K_; ++k) {
        std::int64_t t = 0;
        for (auto [uf, ul] : cells_[g]) t += n_[k][uf][ul];
        marked_[g][k] = t;
      }
      const int lo = groups_ == 2 ? g : 0, hi = groups_ == 2 && g == 0 ? 0 : U_;
      rec_[g] = simulate_recoveries(n_, lambda_, lo, hi, rng);
    }
  }

 private:
  int group_of(int uf) const { return groups_ == 2 && uf >= 1 ? 1 : 0; }
  int horizon(int k) const { return std::min(U_, K_ - 1 - k); }

  double exit_alpha(int id) const { return spec_.rr_exit_concentration / tree_->arity(id); }

  double uniform_hyper(Rng& rng) const { return spec_.hyper_lo + (spec_.hyper_hi - spec_.hyper_lo) * rng.uniform(); }

  void set_data(const ModelData& d) {
    if (groups_ == 2) {
      rec_ = {d.recoveries_juvenile, d.recoveries_adult};
      marked_ = {d.marked_juvenile, d.marked_adult};
    } else {
      rec_ = {d.recoveries};
      marked_ = {d.marked};
    }
  }

  void set_dyadic(int id, double v) { splits_.v[id] = {v, 1.0 - v}; }

  std::int64_t pool_at(int k, int g, int j) const {
    std::int64_t t = 0;
    for (int uf = 0; uf <= U_; ++uf)
      if (group_of(uf) == g) t += n_[k][uf][j];
    return t;
  }

  std::vector<std::int64_t> leaf_counts() const {
    std::vector<std::int64_t> lc(tree_->leaf_count(), 0);
    for (const auto& s : n_)
      for (int uf = 0; uf <= U_; ++uf)
        for (int ul = 0; ul <= U_; ++ul) lc[leaf_[uf][ul]] += s[uf][ul];
    return lc;
  }

  void refresh_g() {
    auto m = leaf_masses(splits_);
    logg_.resize(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) logg_[i] = detail::safe_log(m[i]);
  }

  std::vector<double> survival_probs() const {
    std::vector<double> phi;
    for (int id : los_nodes_) phi.push_back(1.0 - splits_.v[id][0]);
    return phi;
  }

  KernelStats update_slice(int k, Rng& rng, bool adapt) {
    KernelStats st;
    auto& s = n_[k];
    const int h = horizon(k);
    for (int g = 0; g < groups_; ++g) {
      const auto& cells = cells_[g];
      std::vector<std::int64_t> flat(cells.size());
      for (std::size_t c = 0; c < cells.size(); ++c) flat[c] = s[cells[c].first][cells[c].second];
      std::vector<std::int64_t> pool(U_ + 1);
      for (int j = 0; j <= U_; ++j) pool[j] = pool_at(k, g, j);
      auto rec_term = [&](int j, std::int64_t p) {
        return j <= h ? binomial_logpmf(rec_[g][k][k + j], p, lambda_) : 0.0;
      };
      detail::count_moves(
          mover_, std::span<std::int64_t>(flat), 2 * static_cast<int>(cells.size()), rng, adapt,
          [&](const CountMover::Move& m) {
            auto [fa, la] = cells[m.from];
            auto [fb, lb] = cells[m.to];
            double wa = logg_[leaf_[fa][la]], wb = logg_[leaf_[fb][lb]];
            std::int64_t na = flat[m.from], nb = flat[m.to];
            double d = detail::cell_term(na, wa) - detail::cell_term(na + m.delta, wa) + detail::cell_term(nb, wb) -
                       detail::cell_term(nb - m.delta, wb);
            if (d == kNegInf || std::isnan(d)) return kNegInf;
            if (la != lb) {
              double r = rec_term(la, pool[la] - m.delta) + rec_term(lb, pool[lb] + m.delta);
              if (r == kNegInf) return kNegInf;
              d += r - rec_term(la, pool[la]) - rec_term(lb, pool[lb]);
            }
            return d;
          },
          [&](const CountMover::Move& m) {
            pool[cells[m.from].second] -= m.delta;
            pool[cells[m.to].second] += m.delta;
          });
      for (std::size_t c = 0; c < cells.size(); ++c) s[cells[c].first][cells[c].second] = flat[c];
    }
    st += mover_.take_stats();
    return st;
  }

  // (a, b) by random walk on the beta-binomial marginal of the LOS chain, then each V_L exactly.
  KernelStats update_los(Rng& rng, bool adapt) {
    auto nc = node_counts(*tree_, LeafCounts{leaf_counts()});
    auto target = [&](const std::vector<double>& x) {
      if (x[0] < spec_.hyper_lo || x[0] > spec_.hyper_hi || x[1] < spec_.hyper_lo || x[1] > spec_.hyper_hi)
        return kNegInf;
      double t = 0.0;
      for (int id : los_nodes_)
        t += log_beta_fn(x[0] + nc[id][0], x[1] + nc[id][1]) - log_beta_fn(x[0], x[1]);
      return t;
    };
    KernelStats st = kernel_mh_hyper(hyper_, target, rw_, rng, adapt);
    for (int id : los_nodes_) set_dyadic(id, kernel_beta_V(nc[id][0], nc[id][1], hyper_[0], hyper_[1], rng));
    refresh_g();
    return st;
  }

  ModelSpec spec_;
  int K_, U_;
  std::shared_ptr<PartitionTree> tree_;
  std::vector<std::vector<int>> leaf_;
  std::vector<int> los_nodes_, exit_nodes_;
  SplitProbs splits_;
  std::vector<double> logg_;
  int groups_ = 1;
  std::vector<std::pair<int, int>> cells_[2];
  std::vector<Matrix64> rec_;                    // per group, K x K
  std::vector<std::vector<std::int64_t>> marked_;  // per group, per year
  std::vector<Matrix64> n_;
  std::vector<double> hyper_{1.0, 1.0};
  AdaptiveRandomWalk rw_{{5.0, 5.0}};
  CountMover mover_{CountMover::Mode::Transfer, 0.5, 0.25};
  double lambda_ = 0.5;
};

}  // namespace

std::unique_ptr<Model> make_rr_model(const ModelSpec& spec, const ModelData& data) {
  validate_data(spec, data);
  return std::make_unique<RrModel>(spec, data);
}

}  // namespace ptree
