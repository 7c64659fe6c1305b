#include "ptree/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ptree/special.hpp"

namespace ptree {

GammaPrior GammaPrior::from_mean_variance(double mean, double variance) {
  if (!(mean > 0.0 && variance > 0.0)) throw std::invalid_argument("gamma prior needs positive mean and variance");
  return {mean * mean / variance, mean / variance};
}

double kernel_beta_V(std::int64_t successes, std::int64_t remainder, double a, double b, Rng& rng) {
  if (successes < 0 || remainder < 0) throw std::invalid_argument("negative counts in a Beta update");
  return rng.beta(a + static_cast<double>(successes), b + static_cast<double>(remainder));
}

std::vector<double> kernel_dirichlet(std::span<const std::int64_t> counts, std::span<const double> alpha, Rng& rng) {
  if (counts.size() != alpha.size()) throw std::invalid_argument("counts and alpha differ in length");
  std::vector<double> a(alpha.begin(), alpha.end());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += static_cast<double>(counts[i]);
  return rng.dirichlet(a);
}

double kernel_p_capture(std::int64_t captured, std::int64_t available, Rng& rng, BetaPrior prior) {
  if (captured < 0 || captured > available) throw std::invalid_argument("captures exceed availability");
  return rng.beta(prior.a + static_cast<double>(captured), prior.b + static_cast<double>(available - captured));
}

std::pair<double, double> kernel_p_resight_pair(const ResightTotals& t, Rng& rng, BetaPrior prior_r,
                                                BetaPrior prior_c) {
  std::int64_t hits_r = t.channel1_marked_hits + t.unmarked_hits;
  std::int64_t avail_r = t.marked_available + t.unmarked_available;
  double pr = kernel_p_capture(hits_r, avail_r, rng, prior_r);
  double pc = kernel_p_capture(t.channel2_marked_hits, t.marked_available, rng, prior_c);
  return {pr, pc};
}

double kernel_lambda(std::int64_t recoveries, std::int64_t pooled, Rng& rng, BetaPrior prior) {
  return kernel_p_capture(recoveries, pooled, rng, prior);
}

double kernel_intensity(std::int64_t total, const GammaPrior& prior, Rng& rng) {
  return rng.gamma(prior.shape + static_cast<double>(total), prior.rate + 1.0);
}

CountMover::CountMover(Mode mode, double q, double target) : mode_(mode), q_(q), target_(target) {
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("geometric success probability must be in (0, 1]");
}

CountMover::Move CountMover::propose(int cells, Rng& rng) const {
  Move m;
  std::int64_t d = rng.geometric(q_);
  if (mode_ == Mode::Free) {
    m.to = static_cast<int>(rng.index(static_cast<std::size_t>(cells)));
    m.delta = rng.uniform() < 0.5 ? d : -d;
    return m;
  }
  if (cells < 2) return m;  // nothing to move; delta 0
  m.from = static_cast<int>(rng.index(static_cast<std::size_t>(cells)));
  int other = static_cast<int>(rng.index(static_cast<std::size_t>(cells - 1)));
  m.to = other >= m.from ? other + 1 : other;
  m.delta = d;
  return m;
}

bool CountMover::apply(const Move& m, std::span<std::int64_t> x) const {
  if (mode_ == Mode::Free) {
    if (x[m.to] + m.delta < 0) return false;
    x[m.to] += m.delta;
    return true;
  }
  if (m.from < 0) return true;
  if (x[m.from] < m.delta) return false;
  x[m.from] -= m.delta;
  x[m.to] += m.delta;
  return true;
}

void CountMover::undo(const Move& m, std::span<std::int64_t> x) const {
  if (mode_ == Mode::Free) {
    x[m.to] -= m.delta;
  } else if (m.from >= 0) {
    x[m.from] += m.delta;
    x[m.to] -= m.delta;
  }
}

double CountMover::log_proposal(std::span<const std::int64_t> from, std::span<const std::int64_t> to) const {
  const std::size_t n = from.size();
  if (to.size() != n) throw std::invalid_argument("state sizes differ");
  auto log_geom = [&](std::int64_t d) {
    return std::log(q_) + (d > 0 ? static_cast<double>(d) * std::log1p(-q_) : 0.0);
  };
  std::vector<std::size_t> diff;
  for (std::size_t i = 0; i < n; ++i)
    if (from[i] != to[i]) diff.push_back(i);
  const double cells = static_cast<double>(n);
  if (mode_ == Mode::Free) {
    // Zero change arises from any cell and either sign.
    if (diff.empty()) return log_geom(0);
    if (diff.size() != 1) return kNegInf;
    std::int64_t d = to[diff[0]] - from[diff[0]];
    return -std::log(cells) + std::log(0.5) + log_geom(std::abs(d));
  }
  if (n < 2) return diff.empty() ? 0.0 : kNegInf;
  if (diff.empty()) return log_geom(0);
  if (diff.size() != 2) return kNegInf;
  std::int64_t d0 = to[diff[0]] - from[diff[0]], d1 = to[diff[1]] - from[diff[1]];
  if (d0 + d1 != 0) return kNegInf;
  return -std::log(cells) - std::log(cells - 1.0) + log_geom(std::abs(d0));
}

void CountMover::record(bool accepted, bool adapt) {
  ++stats_.proposals;
  if (accepted) ++stats_.accepted;
  if (!adapt) return;
  ++window_prop_;
  if (accepted) ++window_acc_;
  if (window_prop_ >= 50) {
    double rate = static_cast<double>(window_acc_) / static_cast<double>(window_prop_);
    // Accepting too often: lengthen jumps (smaller q).
    double lq = logit(q_) - 2.0 * (rate - target_);
    q_ = std::clamp(inv_logit(lq), 0.01, 0.95);
    window_prop_ = window_acc_ = 0;
  }
}

KernelStats CountMover::take_stats() {
  KernelStats s = stats_;
  stats_ = {};
  return s;
}

bool mh_accept(double log_ratio, Rng& rng) {
  if (std::isnan(log_ratio)) return false;
  if (log_ratio >= 0.0) return true;
  return std::log(rng.uniform()) < log_ratio;
}

KernelStats kernel_mh_hyper(std::vector<double>& x, const std::function<double(const std::vector<double>&)>& log_target,
                            AdaptiveRandomWalk& rw, Rng& rng, bool adapt) {
  std::int64_t p0 = rw.proposals(), a0 = rw.accepted();
  rw.sweep(x, log_target, rng, adapt);
  return {rw.proposals() - p0, rw.accepted() - a0};
}

bool kernel_rw_interval(int& t1, int& t2, int first_seen, int last_seen, int K,
                        const std::function<double(int, int)>& log_target, Rng& rng) {
  int n1 = t1 + static_cast<int>(rng.index(3)) - 1;
  int n2 = t2 + static_cast<int>(rng.index(3)) - 1;
  if (n1 < 1 || n1 > first_seen || n2 < last_seen || n2 > K || n1 > n2) return false;
  if (n1 == t1 && n2 == t2) return true;
  double ratio = log_target(n1, n2) - log_target(t1, t2);
  if (!mh_accept(ratio, rng)) return false;
  t1 = n1;
  t2 = n2;
  return true;
}

}  // namespace ptree
