#include <algorithm>
#include <memory>
#include <stdexcept>

#include "model_util.hpp"
#include "ptree/models.hpp"
#include "ptree/simulate.hpp"

namespace ptree {

namespace {

using detail::idx;

struct Resighted {
  int t1 = 1, t2 = 1;           // availability occasions, inclusive
  int first = 1, last = 1;      // first and last sighting in either channel
  std::int64_t h1 = 0, h2 = 0;  // sightings per channel
};

// Marked individuals resighted on two channels, marked never resighted (nM) and unmarked (nU)
// populations sharing one entry/exit law. Channel 1 also counts unmarked individuals.
class ResightModel final : public Model {
 public:
  ResightModel(const ModelSpec& spec, const ModelData& data) : spec_(spec), K_(spec.occasions()) {
    g_.tie = open_population_tie(spec);
    g_.v.assign(g_.tie->class_count(), 0.5);
    leaf_ = detail::unit_leaf_table(g_.tree(), K_ + 1);
    for (int f = 0; f <= K_; ++f)
      for (int l = f + 1; l <= K_; ++l) cells_.emplace_back(f, l);
    set_individuals(data.resight_1, data.resight_2);
    counts_.assign(K_ + 1, 0);
    for (int j = 1; j <= K_; ++j) counts_[j] = data.counts[0][j - 1];
    nM_.assign(cells_.size(), 0);
    nU_.assign(cells_.size(), 0);
    present_u_.assign(K_ + 1, 0);
    refresh_g();
  }

  std::string kind() const override { return "JointCRCD-resight"; }

  std::vector<std::string> unknowns() const override {
    std::vector<std::string> u{"t", "nM", "nU"};
    for (int c = 0; c < g_.tie->class_count(); ++c) u.push_back(idx("V", c + 1));
    for (const char* x : {"omega_M", "omega_U", "p_R", "p_C"}) u.push_back(x);
    return u;
  }

  std::vector<Kernel> kernels() override {
    std::vector<Kernel> ks;
    ks.push_back({"intervals", {"t"}, true, [this](Rng& rng, bool) { return update_intervals(rng); }});
    ks.push_back({"counts_marked", {"nM"}, true, [this](Rng& rng, bool adapt) { return update_marked(rng, adapt); }});
    ks.push_back(
        {"counts_unmarked", {"nU"}, true, [this](Rng& rng, bool adapt) { return update_unmarked(rng, adapt); }});
    std::vector<std::string> vt;
    for (int c = 0; c < g_.tie->class_count(); ++c) vt.push_back(idx("V", c + 1));
    ks.push_back({"split", vt, false, [this](Rng& rng, bool) {
                    g_.update(leaf_counts(), spec_.dirichlet_alpha, spec_.dirichlet_alpha, rng);
                    refresh_g();
                    return KernelStats{};
                  }});
    ks.push_back({"omega", {"omega_M", "omega_U"}, false, [this](Rng& rng, bool) {
                    omega_m_ = kernel_intensity(marked_total(), spec_.intensity, rng);
                    omega_u_ = kernel_intensity(sum(nU_), spec_.intensity_unmarked, rng);
                    return KernelStats{};
                  }});
    ks.push_back({"detection", {"p_R", "p_C"}, false, [this](Rng& rng, bool) {
                    auto [pr, pc] = kernel_p_resight_pair(totals(), rng, spec_.detection, spec_.detection);
                    pr_ = pr;
                    pc_ = pc;
                    return KernelStats{};
                  }});
    return ks;
  }

  std::vector<std::string> trace_names() const override {
    std::vector<std::string> n{"N_M", "N_U", "omega_M", "omega_U", "p_R", "p_C"};
    for (int j = 1; j <= K_; ++j) n.push_back(idx("entry_cdf", j));
    for (int j = 1; j <= K_; ++j) n.push_back(idx("exit_cdf", j));
    return n;
  }

  void trace(std::vector<double>& out) const override {
    out.push_back(static_cast<double>(marked_total()));
    out.push_back(static_cast<double>(sum(nU_)));
    out.push_back(omega_m_);
    out.push_back(omega_u_);
    out.push_back(pr_);
    out.push_back(pc_);
    auto cells = cell_masses();
    for (double v : entry_cdf(cells)) out.push_back(v);
    for (double v : exit_cdf(cells)) out.push_back(v);
  }

  std::vector<PlotAxis> plot_axes() const override {
    return {{"entry_cdf", spec_.times}, {"exit_cdf", spec_.times}};
  }

  void initialize(Rng& rng) override {
    for (auto& r : ind_) {
      r.t1 = r.first;
      r.t2 = r.last;
    }
    std::fill(nM_.begin(), nM_.end(), 0);
    std::fill(nU_.begin(), nU_.end(), 0);
    std::int64_t need = *std::max_element(counts_.begin(), counts_.end());
    nU_[cell_index(0, K_)] = need;
    refresh_present();
    g_.draw_prior(spec_.dirichlet_alpha, spec_.dirichlet_alpha, rng);
    refresh_g();
    omega_m_ = static_cast<double>(ind_.size()) + 1.0;
    omega_u_ = static_cast<double>(need) + 1.0;
    pr_ = pc_ = 0.5;
  }

  std::unique_ptr<Model> clone() const override { return std::make_unique<ResightModel>(*this); }

  void check_state() const override {
    for (const auto& r : ind_)
      if (r.t1 < 1 || r.t1 > r.first || r.t2 < r.last || r.t2 > K_) throw std::logic_error("interval outside its window");
    for (std::size_t c = 0; c < cells_.size(); ++c)
      if (nM_[c] < 0 || nU_[c] < 0) throw std::logic_error("negative latent count");
    auto pu = present_unmarked();
    for (int j = 1; j <= K_; ++j)
      if (pu[j] != present_u_[j] || counts_[j] > pu[j]) throw std::logic_error("unmarked count identity broken");
    for (double p : {pr_, pc_})
      if (!(p >= 0.0 && p <= 1.0)) throw std::logic_error("probability outside [0, 1]");
  }

  void draw_prior(Rng& rng) override {
    g_.draw_prior(spec_.dirichlet_alpha, spec_.dirichlet_alpha, rng);
    refresh_g();
    omega_m_ = rng.gamma(spec_.intensity.shape, spec_.intensity.rate);
    omega_u_ = rng.gamma(spec_.intensity_unmarked.shape, spec_.intensity_unmarked.rate);
    pr_ = rng.beta(spec_.detection.a, spec_.detection.b);
    pc_ = rng.beta(spec_.detection.a, spec_.detection.b);
    auto masses = cell_masses();
    Matrix64 marked = draw_cells(rng.poisson(omega_m_), masses, rng);
    Matrix64 unmarked = draw_cells(rng.poisson(omega_u_), masses, rng);
    for (std::size_t c = 0; c < cells_.size(); ++c) nU_[c] = unmarked[cells_[c].first][cells_[c].second];
    refresh_present();
    observe_marked(marked, rng);
    counts_ = simulate_counts(present_u_, pr_, rng);
  }

  // Redraws every marked individual's sightings from its cell; seen and unseen sets are re-formed.
  void regenerate_data(Rng& rng) override {
    Matrix64 marked(K_ + 1, std::vector<std::int64_t>(K_ + 1, 0));
    for (const auto& r : ind_) ++marked[r.t1 - 1][r.t2];
    for (std::size_t c = 0; c < cells_.size(); ++c) marked[cells_[c].first][cells_[c].second] += nM_[c];
    observe_marked(marked, rng);
    counts_ = simulate_counts(present_u_, pr_, rng);
  }

 private:
  static std::int64_t sum(const std::vector<std::int64_t>& v) {
    std::int64_t t = 0;
    for (auto x : v) t += x;
    return t;
  }

  std::int64_t marked_total() const { return static_cast<std::int64_t>(ind_.size()) + sum(nM_); }

  int cell_index(int f, int l) const {
    // cells_ is row-major over f < l
    int i = 0;
    for (int ff = 0; ff < f; ++ff) i += K_ - ff;
    return i + (l - f - 1);
  }

  void observe_marked(const Matrix64& marked, Rng& rng) {
    std::vector<std::vector<std::uint8_t>> h1, h2;
    std::fill(nM_.begin(), nM_.end(), 0);
    std::vector<std::pair<int, int>> cells_seen;
    for (int f = 0; f <= K_; ++f)
      for (int l = f + 1; l <= K_; ++l)
        for (std::int64_t i = 0; i < marked[f][l]; ++i) {
          std::vector<std::uint8_t> a(K_, 0), b(K_, 0);
          bool seen = false;
          for (int o = f + 1; o <= l; ++o) {
            a[o - 1] = rng.uniform() < pr_;
            b[o - 1] = rng.uniform() < pc_;
            seen = seen || a[o - 1] || b[o - 1];
          }
          if (seen) {
            h1.push_back(std::move(a));
            h2.push_back(std::move(b));
            cells_seen.emplace_back(f + 1, l);
          } else {
            ++nM_[cell_index(f, l)];
          }
        }
    set_individuals(h1, h2);
    for (std::size_t i = 0; i < ind_.size(); ++i) {
      ind_[i].t1 = cells_seen[i].first;
      ind_[i].t2 = cells_seen[i].second;
    }
  }

  void set_individuals(const std::vector<std::vector<std::uint8_t>>& h1,
                       const std::vector<std::vector<std::uint8_t>>& h2) {
    ind_.clear();
    for (std::size_t i = 0; i < h1.size(); ++i) {
      Resighted r;
      r.first = 0;
      for (int o = 1; o <= K_; ++o) {
        bool any = h1[i][o - 1] || h2[i][o - 1];
        r.h1 += h1[i][o - 1];
        r.h2 += h2[i][o - 1];
        if (any && !r.first) r.first = o;
        if (any) r.last = o;
      }
      r.t1 = r.first;
      r.t2 = r.last;
      ind_.push_back(r);
    }
  }

  CellMatrix cell_masses() const {
    CellMatrix m(K_ + 1, std::vector<double>(K_ + 1, 0.0));
    for (auto [f, l] : cells_) m[f][l] = std::exp(logg_[leaf_[f][l]]);
    return m;
  }

  std::vector<std::int64_t> leaf_counts() const {
    std::vector<std::int64_t> lc(g_.tree().leaf_count(), 0);
    for (const auto& r : ind_) ++lc[leaf_[r.t1 - 1][r.t2]];
    for (std::size_t c = 0; c < cells_.size(); ++c) lc[leaf_[cells_[c].first][cells_[c].second]] += nM_[c] + nU_[c];
    return lc;
  }

  void refresh_g() {
    auto m = g_.leaf_masses();
    logg_.resize(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) logg_[i] = detail::safe_log(m[i]);
  }

  std::vector<std::int64_t> present_unmarked() const {
    std::vector<std::int64_t> p(K_ + 1, 0);
    for (std::size_t c = 0; c < cells_.size(); ++c)
      for (int j = cells_[c].first + 1; j <= cells_[c].second; ++j) p[j] += nU_[c];
    return p;
  }

  void refresh_present() { present_u_ = present_unmarked(); }

  ResightTotals totals() const {
    ResightTotals t;
    for (const auto& r : ind_) {
      t.channel1_marked_hits += r.h1;
      t.channel2_marked_hits += r.h2;
      t.marked_available += r.t2 - r.t1 + 1;
    }
    for (std::size_t c = 0; c < cells_.size(); ++c) t.marked_available += nM_[c] * (cells_[c].second - cells_[c].first);
    for (int j = 1; j <= K_; ++j) {
      t.unmarked_hits += counts_[j];
      t.unmarked_available += present_u_[j];
    }
    return t;
  }

  double individual_target(const Resighted& r, int t1, int t2) const {
    double lg = logg_[leaf_[t1 - 1][t2]];
    double avail = static_cast<double>(t2 - t1 + 1);
    double h1 = static_cast<double>(r.h1), h2 = static_cast<double>(r.h2);
    return lg + h1 * detail::safe_log(pr_) + (avail - h1) * std::log1p(-pr_) + h2 * detail::safe_log(pc_) +
           (avail - h2) * std::log1p(-pc_);
  }

  KernelStats update_intervals(Rng& rng) {
    KernelStats st;
    for (auto& r : ind_) {
      int o1 = r.t1, o2 = r.t2;
      bool moved = kernel_rw_interval(r.t1, r.t2, r.first, r.last, K_,
                                      [&](int a, int b) { return individual_target(r, a, b); }, rng);
      ++st.proposals;
      if (moved && (r.t1 != o1 || r.t2 != o2)) ++st.accepted;
    }
    return st;
  }

  KernelStats update_marked(Rng& rng, bool adapt) {
    const double lw = detail::safe_log(omega_m_);
    const double miss = std::log1p(-pr_) + std::log1p(-pc_);
    detail::count_moves(
        mover_m_, std::span<std::int64_t>(nM_), 2 * static_cast<int>(cells_.size()), rng, adapt,
        [&](const CountMover::Move& m) {
          auto [f, l] = cells_[m.to];
          double w = logg_[leaf_[f][l]] + lw;
          std::int64_t now = nM_[m.to];
          return detail::cell_term(now, w) - detail::cell_term(now - m.delta, w) +
                 static_cast<double>(m.delta) * static_cast<double>(l - f) * miss;
        },
        [](const CountMover::Move&) {});
    return mover_m_.take_stats();
  }

  KernelStats update_unmarked(Rng& rng, bool adapt) {
    const double lw = detail::safe_log(omega_u_);
    auto count_at = [&](int j, std::int64_t n) { return count_loglik(counts_[j], n, pr_); };
    detail::count_moves(
        mover_u_, std::span<std::int64_t>(nU_), 2 * static_cast<int>(cells_.size()), rng, adapt,
        [&](const CountMover::Move& m) {
          auto [f, l] = cells_[m.to];
          double w = logg_[leaf_[f][l]] + lw;
          std::int64_t now = nU_[m.to];
          double d = detail::cell_term(now, w) - detail::cell_term(now - m.delta, w);
          for (int j = f + 1; j <= l; ++j) {
            double t = count_at(j, present_u_[j] + m.delta);
            if (t == kNegInf) return kNegInf;
            d += t - count_at(j, present_u_[j]);
          }
          return d;
        },
        [&](const CountMover::Move& m) {
          auto [f, l] = cells_[m.to];
          for (int j = f + 1; j <= l; ++j) present_u_[j] += m.delta;
        });
    return mover_u_.take_stats();
  }

  ModelSpec spec_;
  int K_;
  detail::TiedDyadicTree g_;
  std::vector<std::vector<int>> leaf_;
  std::vector<double> logg_;
  std::vector<std::pair<int, int>> cells_;
  std::vector<Resighted> ind_;
  std::vector<std::int64_t> counts_;     // unmarked channel-1 counts, index 1..K
  std::vector<std::int64_t> present_u_;  // index 1..K
  std::vector<std::int64_t> nM_, nU_;
  CountMover mover_m_{CountMover::Mode::Free, 0.5, 0.25};
  CountMover mover_u_{CountMover::Mode::Free, 0.5, 0.25};
  double omega_m_ = 1.0, omega_u_ = 1.0;
  double pr_ = 0.5, pc_ = 0.5;
};

}  // namespace

std::unique_ptr<Model> make_resight_model(const ModelSpec& spec, const ModelData& data) {
  validate_data(spec, data);
  if (!spec.resight) throw std::invalid_argument("resighting builder needs resight = true");
  return std::make_unique<ResightModel>(spec, data);
}

}  // namespace ptree
