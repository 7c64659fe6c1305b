#include <algorithm>
#include <memory>
#include <stdexcept>

#include "model_util.hpp"
#include "ptree/models.hpp"
#include "ptree/simulate.hpp"

namespace ptree {

namespace {

using detail::idx;

}  // namespace

std::shared_ptr<const TieMap> open_population_tie(const ModelSpec& spec) {
  if (spec.tie_exit) return std::make_shared<TieMap>(eebp_exit_tie_map(spec.grid(), true));
  auto t = std::make_shared<TieMap>(
      std::vector<std::shared_ptr<const PartitionTree>>{std::make_shared<PartitionTree>(build_eebp(spec.grid(), true))});
  return t;
}

namespace {

// Open population with capture histories and occasion counts. Slice k >= 1 holds individuals first
// captured at k, slice 0 the never-captured ones; cells (f, l) have f < l (present at >= 1 occasion).
class JointModel final : public Model {
 public:
  JointModel(const ModelSpec& spec, const ModelData& data) : spec_(spec), K_(spec.occasions()) {
    g_.tie = open_population_tie(spec);
    g_.v.assign(g_.tie->class_count(), 0.5);
    leaf_ = detail::unit_leaf_table(g_.tree(), K_ + 1);
    s_ = summarize_histories(data.histories);
    counts_.assign(K_ + 1, 0);
    for (int j = 1; j <= K_; ++j) counts_[j] = data.counts[0][j - 1];
    for (int k = 0; k <= K_; ++k) {
      std::vector<std::pair<int, int>> cells;
      for (int f = 0; f <= K_; ++f)
        for (int l = f + 1; l <= K_; ++l)
          if (k == 0 || (f < k && l >= k)) cells.emplace_back(f, l);
      cells_.push_back(cells);
      movers_.emplace_back(k == 0 ? CountMover::Mode::Free : CountMover::Mode::Transfer, 0.5, 0.25);
    }
    n_ = OpenCounts::zeros(K_);
    refresh_present();
    refresh_g();
  }

  std::string kind() const override { return "JointCRCD"; }

  std::vector<std::string> unknowns() const override {
    std::vector<std::string> u;
    for (int k = 0; k <= K_; ++k) u.push_back(idx("n", k));
    for (int c = 0; c < g_.tie->class_count(); ++c) u.push_back(idx("V", c + 1));
    for (const char* x : {"omega", "p_C", "p_D"}) u.push_back(x);
    return u;
  }

  std::vector<Kernel> kernels() override {
    std::vector<Kernel> ks;
    for (int k = 0; k <= K_; ++k)
      ks.push_back({idx("counts", k), {idx("n", k)}, true,
                    [this, k](Rng& rng, bool adapt) { return update_slice(k, rng, adapt); }});
    std::vector<std::string> vt;
    for (int c = 0; c < g_.tie->class_count(); ++c) vt.push_back(idx("V", c + 1));
    ks.push_back({"split", vt, false, [this](Rng& rng, bool) {
                    g_.update(leaf_counts(), spec_.dirichlet_alpha, spec_.dirichlet_alpha, rng);
                    refresh_g();
                    return KernelStats{};
                  }});
    ks.push_back({"omega", {"omega"}, false, [this](Rng& rng, bool) {
                    omega_ = kernel_intensity(n_.grand_total(), spec_.intensity, rng);
                    return KernelStats{};
                  }});
    ks.push_back({"p_C", {"p_C"}, false, [this](Rng& rng, bool) {
                    std::int64_t caught = 0, avail = 0;
                    for (int k = 1; k <= K_; ++k) caught += s_.captures_by_first[k];
                    for (int k = 0; k <= K_; ++k) avail += opencr_available(n_, k);
                    pc_ = kernel_p_capture(caught, avail, rng, spec_.detection);
                    return KernelStats{};
                  }});
    ks.push_back({"p_D", {"p_D"}, false, [this](Rng& rng, bool) {
                    std::int64_t c = 0, a = 0;
                    for (int j = 1; j <= K_; ++j) {
                      c += counts_[j];
                      a += present_[j];
                    }
                    pd_ = kernel_p_capture(c, a, rng, spec_.detection);
                    return KernelStats{};
                  }});
    return ks;
  }

  std::vector<std::string> trace_names() const override {
    std::vector<std::string> n{"N", "omega", "p_C", "p_D"};
    for (int j = 1; j <= K_; ++j) n.push_back(idx("entry_cdf", j));
    for (int j = 1; j <= K_; ++j) n.push_back(idx("exit_cdf", j));
    return n;
  }

  void trace(std::vector<double>& out) const override {
    out.push_back(static_cast<double>(n_.grand_total()));
    out.push_back(omega_);
    out.push_back(pc_);
    out.push_back(pd_);
    auto cells = cell_masses();
    for (double v : entry_cdf(cells)) out.push_back(v);
    for (double v : exit_cdf(cells)) out.push_back(v);
  }

  std::vector<PlotAxis> plot_axes() const override {
    return {{"entry_cdf", spec_.times}, {"exit_cdf", spec_.times}};
  }

  void initialize(Rng& rng) override {
    n_ = OpenCounts::zeros(K_);
    for (int k = 1; k <= K_; ++k) n_.slice[k][k - 1][K_] = s_.f[k];
    refresh_present();
    std::int64_t extra = 0;
    for (int j = 1; j <= K_; ++j) extra = std::max(extra, counts_[j] - present_[j]);
    n_.slice[0][0][K_] = extra;
    refresh_present();
    g_.draw_prior(spec_.dirichlet_alpha, spec_.dirichlet_alpha, rng);
    refresh_g();
    omega_ = std::max<double>(1.0, static_cast<double>(n_.grand_total()));
    pc_ = pd_ = 0.5;
  }

  std::unique_ptr<Model> clone() const override { return std::make_unique<JointModel>(*this); }

  void check_state() const override {
    for (int k = 1; k <= K_; ++k)
      if (n_.total(k) != s_.f[k]) throw std::logic_error("slice total differs from first captures");
    for (int k = 0; k <= K_; ++k)
      for (int f = 0; f <= K_; ++f)
        for (int l = 0; l <= K_; ++l) {
          auto v = n_.slice[k][f][l];
          if (v < 0) throw std::logic_error("negative latent count");
          if (v > 0 && leaf_[f][l] < 0) throw std::logic_error("count in an unavailable cell");
        }
    if (opencr_loglik(s_, n_, pc_) == kNegInf) throw std::logic_error("state inconsistent with the histories");
    auto present = present_by_occasion(n_.combined());
    for (int j = 1; j <= K_; ++j)
      if (present[j] != present_[j] || counts_[j] > present[j]) throw std::logic_error("count identity broken");
    for (double p : {pc_, pd_})
      if (!(p >= 0.0 && p <= 1.0)) throw std::logic_error("probability outside [0, 1]");
    if (!(omega_ > 0.0)) throw std::logic_error("intensity must be positive");
  }

  void draw_prior(Rng& rng) override {
    g_.draw_prior(spec_.dirichlet_alpha, spec_.dirichlet_alpha, rng);
    refresh_g();
    omega_ = rng.gamma(spec_.intensity.shape, spec_.intensity.rate);
    pc_ = rng.beta(spec_.detection.a, spec_.detection.b);
    pd_ = rng.beta(spec_.detection.a, spec_.detection.b);
    Matrix64 cells = draw_cells(rng.poisson(omega_), cell_masses(), rng);
    auto [slices, hist] = simulate_open_population(cells, pc_, rng);
    n_ = std::move(slices);
    s_ = summarize_histories(hist);
    refresh_present();
    auto c = simulate_counts(present_, pd_, rng);
    counts_ = c;
  }

  void regenerate_data(Rng& rng) override {
    // Slice totals are first-capture counts, fixed by the Transfer kernels; redrawing histories within
    // slices would freeze them. Redraw slices and data jointly given the combined population matrix.
    auto [slices, hist] = simulate_open_population(n_.combined(), pc_, rng);
    n_ = std::move(slices);
    s_ = summarize_histories(hist);
    counts_ = simulate_counts(present_, pd_, rng);
  }

 private:
  CellMatrix cell_masses() const {
    CellMatrix m(K_ + 1, std::vector<double>(K_ + 1, 0.0));
    for (int f = 0; f <= K_; ++f)
      for (int l = 0; l <= K_; ++l)
        if (leaf_[f][l] >= 0) m[f][l] = std::exp(logg_[leaf_[f][l]]);
    return m;
  }

  std::vector<std::int64_t> leaf_counts() const {
    std::vector<std::int64_t> lc(g_.tree().leaf_count(), 0);
    for (int k = 0; k <= K_; ++k)
      for (int f = 0; f <= K_; ++f)
        for (int l = 0; l <= K_; ++l)
          if (leaf_[f][l] >= 0) lc[leaf_[f][l]] += n_.slice[k][f][l];
    return lc;
  }

  void refresh_g() {
    auto m = g_.leaf_masses();
    logg_.resize(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) logg_[i] = detail::safe_log(m[i]);
  }

  void refresh_present() { present_ = present_by_occasion(n_.combined()); }

  double count_terms() const {
    double out = 0.0;
    for (int j = 1; j <= K_; ++j) out += count_loglik(counts_[j], present_[j], pd_);
    return out;
  }

  void shift_present(int f, int l, std::int64_t d) {
    for (int j = f + 1; j <= l; ++j) present_[j] += d;
  }

  KernelStats update_slice(int k, Rng& rng, bool adapt) {
    auto& M = n_.slice[k];
    const auto& cells = cells_[k];
    CountMover& mover = movers_[k];
    const double logw = detail::safe_log(omega_);
    const double miss = detail::safe_log(1.0 - pc_);
    double cur_slice = k == 0 ? 0.0 : opencr_slice_loglik(s_, n_, k, pc_);
    double cur_counts = count_terms();
    const int moves = 2 * static_cast<int>(cells.size());
    for (int i = 0; i < moves; ++i) {
      auto m = mover.propose(static_cast<int>(cells.size()), rng);
      // Express every move as up to two signed cell changes.
      int a = -1, b = -1;
      std::int64_t da = 0, db = 0;
      if (mover.mode() == CountMover::Mode::Free) {
        a = m.to;
        da = m.delta;
      } else {
        a = m.from;
        da = -m.delta;
        b = m.to;
        db = m.delta;
      }
      auto [fa, la] = cells[a];
      if (M[fa][la] + da < 0) {
        mover.record(false, adapt);
        continue;
      }
      if (da == 0 && db == 0) {
        mover.record(true, adapt);
        continue;
      }
      double delta = 0.0;
      auto change = [&](int c, std::int64_t d) {
        auto [f, l] = cells[c];
        double lw = logg_[leaf_[f][l]] + logw;
        delta += detail::cell_term(M[f][l] + d, lw) - detail::cell_term(M[f][l], lw);
        if (k == 0 && d != 0) delta += static_cast<double>(d) * static_cast<double>(l - f) * miss;
        M[f][l] += d;
        shift_present(f, l, d);
      };
      change(a, da);
      if (b >= 0) change(b, db);
      double prop_slice = k == 0 ? 0.0 : opencr_slice_loglik(s_, n_, k, pc_);
      double prop_counts = count_terms();
      double ratio = (prop_slice == kNegInf || prop_counts == kNegInf || delta == kNegInf)
                         ? kNegInf
                         : delta + prop_slice - cur_slice + prop_counts - cur_counts;
      if (mh_accept(ratio, rng)) {
        cur_slice = prop_slice;
        cur_counts = prop_counts;
        mover.record(true, adapt);
      } else {
        auto undo = [&](int c, std::int64_t d) {
          auto [f, l] = cells[c];
          M[f][l] -= d;
          shift_present(f, l, -d);
        };
        undo(a, da);
        if (b >= 0) undo(b, db);
        mover.record(false, adapt);
      }
    }
    return mover.take_stats();
  }

  ModelSpec spec_;
  int K_;
  detail::TiedDyadicTree g_;
  std::vector<std::vector<int>> leaf_;
  std::vector<double> logg_;
  FirstLastSummary s_;
  std::vector<std::int64_t> counts_;   // index 1..K
  std::vector<std::int64_t> present_;  // index 1..K
  std::vector<std::vector<std::pair<int, int>>> cells_;
  std::vector<CountMover> movers_;
  OpenCounts n_;
  double omega_ = 1.0;
  double pc_ = 0.5;
  double pd_ = 0.5;
};

}  // namespace

std::unique_ptr<Model> make_joint_model(const ModelSpec& spec, const ModelData& data) {
  validate_data(spec, data);
  if (spec.resight) throw std::invalid_argument("resighting variant requested from the plain joint builder");
  return std::make_unique<JointModel>(spec, data);
}

}  // namespace ptree
