#include <memory>
#include <stdexcept>

#include "model_util.hpp"
#include "ptree/models.hpp"
#include "ptree/simulate.hpp"

namespace ptree {

namespace {

using detail::idx;

class CjsModel final : public Model {
 public:
  CjsModel(const ModelSpec& spec, const ModelData& data)
      : spec_(spec), tie_(std::make_shared<TieMap>(cjs_tie_map(spec.grid(), spec.constraint))) {
    K_ = spec.occasions();
    s_ = summarize_histories(data.histories);
    V_.assign(tie_->class_count(), 0.5);
    for (int k = 1; k <= K_; ++k)
      if (K_ - k + 1 >= 2) movers_.emplace_back(CountMover::Mode::Transfer, 0.5, 0.25);
    n_ = CjsCounts::zeros(K_);
    refresh_weights();
  }

  std::string kind() const override { return "CJS"; }

  std::vector<std::string> unknowns() const override {
    std::vector<std::string> u;
    for (int k = 1; k <= K_; ++k)
      if (n_.length(k) >= 2) u.push_back(idx("n", k));
    for (int c = 0; c < tie_->class_count(); ++c) u.push_back(idx("V", c + 1));
    u.push_back("p");
    return u;
  }

  std::vector<Kernel> kernels() override {
    std::vector<Kernel> ks;
    int m = 0;
    for (int k = 1; k <= K_; ++k) {
      if (n_.length(k) < 2) continue;
      int mi = m++;
      ks.push_back({idx("counts", k), {idx("n", k)}, true,
                    [this, k, mi](Rng& rng, bool adapt) { return update_slice(k, movers_[mi], rng, adapt); }});
    }
    std::vector<std::string> vt;
    for (int c = 0; c < tie_->class_count(); ++c) vt.push_back(idx("V", c + 1));
    ks.push_back({"split", vt, false, [this](Rng& rng, bool) {
                    update_splits(rng);
                    return KernelStats{};
                  }});
    ks.push_back({"p", {"p"}, false, [this](Rng& rng, bool) {
                    update_p(rng);
                    return KernelStats{};
                  }});
    return ks;
  }

  std::vector<std::string> trace_names() const override {
    std::vector<std::string> n;
    for (int c = 0; c < tie_->class_count(); ++c) n.push_back(idx("phi", c + 1));
    n.push_back("p");
    return n;
  }

  void trace(std::vector<double>& out) const override {
    for (double v : V_) out.push_back(1.0 - v);
    out.push_back(p_);
  }

  void initialize(Rng& rng) override {
    n_ = CjsCounts::zeros(K_);
    for (int k = 1; k <= K_; ++k) n_.at(k, n_.length(k)) = s_.f[k];
    for (auto& v : V_) v = rng.beta(spec_.split.a, spec_.split.b);
    p_ = 0.5;
    refresh_weights();
  }

  std::unique_ptr<Model> clone() const override { return std::make_unique<CjsModel>(*this); }

  void check_state() const override {
    for (int k = 1; k <= K_; ++k) {
      std::int64_t t = 0;
      for (int j = 1; j <= n_.length(k); ++j) {
        if (n_.at(k, j) < 0) throw std::logic_error("negative latent count");
        t += n_.at(k, j);
      }
      if (t != s_.f[k]) throw std::logic_error("slice total differs from first captures");
    }
    for (double v : V_)
      if (!(v >= 0.0 && v <= 1.0)) throw std::logic_error("split probability outside [0, 1]");
    if (!(p_ >= 0.0 && p_ <= 1.0)) throw std::logic_error("p outside [0, 1]");
    if (cjs_loglik(s_, n_, p_) == kNegInf) throw std::logic_error("state inconsistent with the histories");
  }

  void draw_prior(Rng& rng) override {
    for (auto& v : V_) v = rng.beta(spec_.split.a, spec_.split.b);
    p_ = rng.beta(spec_.detection.a, spec_.detection.b);
    refresh_weights();
    for (int k = 1; k <= K_; ++k) {
      std::vector<double> w(n_.length(k));
      for (int j = 0; j < n_.length(k); ++j) w[j] = std::exp(logw_[k - 1][j]);
      auto d = rng.multinomial(s_.f[k], w);
      for (int j = 1; j <= n_.length(k); ++j) n_.at(k, j) = d[j - 1];
    }
    regenerate_data(rng);
  }

  void regenerate_data(Rng& rng) override { s_ = summarize_histories(simulate_cjs_histories(n_, p_, rng)); }

 private:
  void refresh_weights() {
    logw_.assign(K_, {});
    for (int k = 1; k <= K_; ++k) {
      const PartitionTree& t = tie_->tree(k - 1);
      auto& w = logw_[k - 1];
      w.assign(n_.length(k), 0.0);
      double stay = 0.0;
      for (int id : t.internal_nodes()) {
        int s = t.node(id).step;
        double v = V_[tie_->class_of({k - 1, id})];
        w[s] = stay + detail::safe_log(v);
        stay += detail::safe_log(1.0 - v);
      }
      w.back() = stay;
    }
  }

  KernelStats update_slice(int k, CountMover& mover, Rng& rng, bool adapt) {
    auto& row = n_.slice[k - 1];
    const auto& w = logw_[k - 1];
    double cur = cjs_slice_loglik(s_, n_, k, p_);
    detail::count_moves(
        mover, std::span<std::int64_t>(row), 2 * static_cast<int>(row.size()), rng, adapt,
        [&](const CountMover::Move& m) {
          double prop = cjs_slice_loglik(s_, n_, k, p_);
          if (prop == kNegInf) return kNegInf;
          std::int64_t a = row[m.from], b = row[m.to];
          double d = detail::cell_term(a, w[m.from]) - detail::cell_term(a + m.delta, w[m.from]) +
                     detail::cell_term(b, w[m.to]) - detail::cell_term(b - m.delta, w[m.to]);
          last_prop_ = prop;
          return d + prop - cur;
        },
        [&](const CountMover::Move&) { cur = last_prop_; });
    return mover.take_stats();
  }

  void update_splits(Rng& rng) {
    for (int c = 0; c < tie_->class_count(); ++c) {
      std::int64_t succ = 0, rem = 0;
      for (const NodeRef& r : tie_->members(c)) {
        int k = r.tree + 1;
        int s = tie_->tree(r.tree).node(r.node).step;
        succ += n_.at(k, s + 1);
        for (int j = s + 2; j <= n_.length(k); ++j) rem += n_.at(k, j);
      }
      V_[c] = kernel_beta_V(succ, rem, spec_.split.a, spec_.split.b, rng);
    }
    refresh_weights();
  }

  void update_p(Rng& rng) {
    std::int64_t caught = 0, avail = 0;
    for (int k = 1; k <= K_; ++k) {
      caught += s_.captures_by_first[k] - s_.f[k];
      avail += cjs_available(n_, k);
    }
    p_ = kernel_p_capture(caught, avail, rng, spec_.detection);
  }

  ModelSpec spec_;
  std::shared_ptr<const TieMap> tie_;
  int K_ = 0;
  FirstLastSummary s_;
  CjsCounts n_;
  std::vector<double> V_;
  double p_ = 0.5;
  std::vector<std::vector<double>> logw_;
  std::vector<CountMover> movers_;
  double last_prop_ = 0.0;
};

}  // namespace

std::unique_ptr<Model> make_cjs_model(const ModelSpec& spec, const ModelData& data) {
  validate_data(spec, data);
  return std::make_unique<CjsModel>(spec, data);
}

}  // namespace ptree
