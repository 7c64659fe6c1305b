#include "ptree/hlpt.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "ptree/polya_tree.hpp"
#include "ptree/special.hpp"

namespace ptree {

std::vector<double> logistic_split_probs(std::span<const double> beta) {
  std::vector<bool> all(beta.size() + 1, true);
  return logistic_split_probs(beta, all);
}

std::vector<double> logistic_split_probs(std::span<const double> beta, const std::vector<bool>& feasible) {
  const std::size_t arity = beta.size() + 1;
  if (feasible.size() != arity) throw std::invalid_argument("feasibility mask has the wrong length");
  if (!feasible.back()) throw std::invalid_argument("reference category must be feasible");
  double m = 0.0;
  for (std::size_t c = 0; c + 1 < arity; ++c)
    if (feasible[c]) m = std::max(m, beta[c]);
  std::vector<double> p(arity, 0.0);
  double total = 0.0;
  for (std::size_t c = 0; c < arity; ++c) {
    if (!feasible[c]) continue;
    double b = c + 1 < arity ? beta[c] : 0.0;
    p[c] = std::exp(b - m);
    total += p[c];
  }
  for (double& x : p) x /= total;
  return p;
}

NormalMoments beta_dyadic_moments(std::int64_t n0, std::int64_t n, double pg_omega, double mu, double sigma) {
  if (n0 < 0 || n < n0) throw std::invalid_argument("invalid dyadic node counts");
  double kappa = static_cast<double>(n0) - 0.5 * static_cast<double>(n);
  double prec = pg_omega + 1.0 / (sigma * sigma);
  return {(kappa + mu / (sigma * sigma)) / prec, 1.0 / prec};
}

double gibbs_beta_dyadic(std::int64_t n0, std::int64_t n, double pg_omega, double mu, double sigma, Rng& rng) {
  auto m = beta_dyadic_moments(n0, n, pg_omega, mu, sigma);
  return rng.normal(m.mean, std::sqrt(m.variance));
}

double gibbs_pg_aux(std::int64_t n, double beta, Rng& rng, const PGConfig& cfg) {
  if (n < 0) throw std::invalid_argument("negative count");
  if (n == 0) return 0.0;
  return sample_pg({n, beta}, rng, cfg);
}

namespace {
// log of the sum of exp(beta_k) over feasible k != j, with the reference coefficient fixed at 0.
double rest_logsum(std::size_t j, std::span<const double> beta, const std::vector<bool>* feasible) {
  const std::size_t arity = beta.size() + 1;
  std::vector<double> terms;
  for (std::size_t k = 0; k < arity; ++k) {
    if (k == j) continue;
    if (feasible && !(*feasible)[k]) continue;
    terms.push_back(k + 1 < arity ? beta[k] : 0.0);
  }
  return log_sum_exp(terms);
}

std::int64_t total_of(std::span<const std::int64_t> v) {
  std::int64_t s = 0;
  for (auto x : v) {
    if (x < 0) throw std::invalid_argument("negative count");
    s += x;
  }
  return s;
}
}  // namespace

NormalMoments multinomial_entry_moments(std::size_t j, std::span<const std::int64_t> counts,
                                        std::span<const double> beta, double pg_omega, double mu, double sigma) {
  if (counts.size() != beta.size() + 1 || j >= beta.size()) throw std::invalid_argument("bad multinomial node shape");
  double n = static_cast<double>(total_of(counts));
  double c = rest_logsum(j, beta, nullptr);
  double kappa = static_cast<double>(counts[j]) - 0.5 * n;
  double prec = 1.0 / (sigma * sigma) + pg_omega;
  return {(kappa + pg_omega * c + mu / (sigma * sigma)) / prec, 1.0 / prec};
}

double multinomial_pg_entry_update(std::size_t j, std::span<const std::int64_t> counts, std::vector<double>& beta,
                                   double mu, double sigma, Rng& rng, const PGConfig& cfg) {
  std::int64_t n = total_of(counts);
  double c = rest_logsum(j, beta, nullptr);
  double omega = gibbs_pg_aux(n, beta[j] - c, rng, cfg);
  auto m = multinomial_entry_moments(j, counts, beta, omega, mu, sigma);
  beta[j] = rng.normal(m.mean, std::sqrt(m.variance));
  return beta[j];
}

NormalMoments multinomial_exit_moments(std::size_t j, const std::vector<ExitGroup>& groups,
                                       std::span<const double> beta, std::span<const double> pg_omegas, double mu,
                                       double sigma) {
  if (pg_omegas.size() != groups.size()) throw std::invalid_argument("one PG auxiliary per group required");
  double prec = 1.0 / (sigma * sigma);
  double num = mu / (sigma * sigma);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const ExitGroup& grp = groups[g];
    if (grp.counts.size() != beta.size() + 1 || grp.feasible.size() != beta.size() + 1)
      throw std::invalid_argument("bad exit group shape");
    if (!grp.feasible[j]) continue;
    double a = static_cast<double>(total_of(grp.counts));
    if (a == 0.0) continue;
    double c = rest_logsum(j, beta, &grp.feasible);
    num += static_cast<double>(grp.counts[j]) - 0.5 * a + pg_omegas[g] * c;
    prec += pg_omegas[g];
  }
  return {num / prec, 1.0 / prec};
}

double multinomial_pg_exit_update(std::size_t j, const std::vector<ExitGroup>& groups, std::vector<double>& beta,
                                  double mu, double sigma, Rng& rng, const PGConfig& cfg) {
  std::vector<double> omegas(groups.size(), 0.0);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const ExitGroup& grp = groups[g];
    if (!grp.feasible.at(j)) continue;
    std::int64_t a = total_of(grp.counts);
    if (a == 0) continue;
    double c = rest_logsum(j, beta, &grp.feasible);
    omegas[g] = gibbs_pg_aux(a, beta[j] - c, rng, cfg);
  }
  auto m = multinomial_exit_moments(j, groups, beta, omegas, mu, sigma);
  beta[j] = rng.normal(m.mean, std::sqrt(m.variance));
  return beta[j];
}

Eigen::MatrixXd gp_covariance(std::size_t n, double sigma0, double length_scale) {
  if (!(sigma0 > 0.0) || !(length_scale > 0.0)) throw std::invalid_argument("GP hyperparameters must be positive");
  Eigen::MatrixXd k(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      double d = static_cast<double>(a) - static_cast<double>(b);
      k(a, b) = sigma0 * sigma0 * std::exp(-d * d / (length_scale * length_scale));
    }
  return k;
}

namespace {
std::atomic<long> g_jitter_events{0};

Eigen::MatrixXd spd_inverse(Eigen::MatrixXd m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    ++g_jitter_events;
    m.diagonal().array() += 1e-8;
    llt.compute(m);
    if (llt.info() != Eigen::Success) throw std::runtime_error("GP covariance is not positive definite");
  }
  return llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}
}  // namespace

void gp_mean_posterior(const std::vector<std::vector<double>>& beta_panel, const GPHyper& hyper, double sigma,
                       Eigen::VectorXd& mean, Eigen::MatrixXd& cov) {
  const std::size_t n = hyper.mu0.size();
  Eigen::MatrixXd prior_prec = spd_inverse(gp_covariance(n, hyper.sigma0, hyper.length_scale));
  Eigen::VectorXd mu0 = Eigen::Map<const Eigen::VectorXd>(hyper.mu0.data(), static_cast<Eigen::Index>(n));
  Eigen::VectorXd rhs = prior_prec * mu0;
  Eigen::MatrixXd prec = prior_prec;
  for (const auto& row : beta_panel) {
    if (row.size() != n) throw std::invalid_argument("beta panel row has the wrong length");
    for (std::size_t i = 0; i < n; ++i) rhs(i) += row[i] / (sigma * sigma);
    prec.diagonal().array() += 1.0 / (sigma * sigma);
  }
  cov = spd_inverse(prec);
  mean = cov * rhs;
}

std::vector<double> gp_mean_update(const std::vector<std::vector<double>>& beta_panel, const GPHyper& hyper,
                                   double sigma, Rng& rng) {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  gp_mean_posterior(beta_panel, hyper, sigma, mean, cov);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    cov.diagonal().array() += 1e-12;
    llt.compute(cov);
  }
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  Eigen::VectorXd draw = mean + llt.matrixL() * z;
  return std::vector<double>(draw.data(), draw.data() + draw.size());
}

NormalMoments collapsed_mean_moments(std::span<const double> kappa, std::span<const double> omega, double m0,
                                     double s0, double sigma) {
  double prec = 1.0 / (s0 * s0);
  double num = m0 / (s0 * s0);
  for (std::size_t s = 0; s < kappa.size(); ++s) {
    if (omega[s] <= 0.0) continue;
    double v = 1.0 / omega[s] + sigma * sigma;
    prec += 1.0 / v;
    num += (kappa[s] / omega[s]) / v;
  }
  return {num / prec, 1.0 / prec};
}

AdaptiveRandomWalk::AdaptiveRandomWalk(std::vector<double> scales, double target)
    : scales_(std::move(scales)), window_prop_(scales_.size(), 0), window_acc_(scales_.size(), 0), target_(target) {}

int AdaptiveRandomWalk::sweep(std::vector<double>& x, const std::function<double(const std::vector<double>&)>& log_target,
                              Rng& rng, bool adapt) {
  int accepted = 0;
  double current = log_target(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double old = x[i];
    x[i] = old + scales_[i] * rng.normal();
    double proposed = log_target(x);
    bool ok = std::log(rng.uniform()) < proposed - current;
    if (ok) {
      current = proposed;
      ++accepted;
      ++accepted_;
      ++window_acc_[i];
    } else {
      x[i] = old;
    }
    ++proposals_;
    ++window_prop_[i];
    if (adapt && window_prop_[i] == 50) {
      double rate = static_cast<double>(window_acc_[i]) / 50.0;
      scales_[i] *= std::exp(2.0 * (rate - target_));
      window_prop_[i] = window_acc_[i] = 0;
    }
  }
  return accepted;
}

double laplace_cdf(double x, double location, double scale) {
  double z = (x - location) / scale;
  return z < 0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
}

std::vector<double> product_leaf_masses(const PartitionTree& tree, const std::function<double(double)>& entry_cdf,
                                        const std::function<double(double)>& exit_cdf) {
  auto unit_mass = [](const AxisGrid& axis, int u, const std::function<double(double)>& cdf) {
    Bound lo = axis.lower(u), hi = axis.upper(u);
    double a = lo.kind == Bound::Kind::NegInf ? 0.0 : cdf(lo.value);
    double b = hi.kind == Bound::Kind::PosInf ? 1.0 : cdf(hi.value);
    return std::max(b - a, 0.0);
  };
  std::vector<double> mass(tree.leaf_count(), 0.0);
  double total = 0.0;
  for (int leaf : tree.leaves()) {
    double m = 0.0;
    for (auto [e, x] : tree.units_of(leaf)) {
      double u = unit_mass(tree.entry_axis(), e, entry_cdf) * unit_mass(tree.exit_axis(), x, exit_cdf);
      if (tree.ordered() && e == x) u *= 0.5;
      m += u;
    }
    mass[tree.node(leaf).leaf_index] = m;
    total += m;
  }
  if (!(total > 0.0)) throw std::invalid_argument("base measure puts no mass on the tree");
  for (double& m : mass) m /= total;
  return mass;
}

std::vector<std::vector<double>> centering_logits(const PartitionTree& tree, const std::vector<double>& leaf_mass) {
  auto m = node_mass(tree, leaf_mass);
  std::vector<std::vector<double>> out(tree.size());
  for (int id = 0; id < tree.size(); ++id) {
    const auto& ch = tree.node(id).children;
    if (ch.empty()) continue;
    double ref = std::log(m[ch.back()]);
    for (std::size_t c = 0; c + 1 < ch.size(); ++c) out[id].push_back(std::log(m[ch[c]]) - ref);
  }
  return out;
}

double laplace_window_mass(const LaplacePrior& prior, double lo, double hi) {
  // Simpson rule over location (+-7 sd) and scale (0 .. mean + 12 sd of the Gamma prior).
  const int nm = 200, ns = 400;
  double m_lo = prior.location_mean - 7.0 * prior.location_sd;
  double m_hi = prior.location_mean + 7.0 * prior.location_sd;
  double s_mean = prior.scale_shape / prior.scale_rate;
  double s_hi = s_mean + 12.0 * std::sqrt(prior.scale_shape) / prior.scale_rate;
  auto simpson_w = [](int i, int n) { return (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0); };
  double hm = (m_hi - m_lo) / nm, hs = s_hi / ns;
  double total = 0.0, norm = 0.0;
  for (int a = 0; a <= nm; ++a) {
    double mu = m_lo + a * hm;
    double wm = simpson_w(a, nm) * std::exp(normal_logpdf(mu, prior.location_mean, prior.location_sd));
    for (int b = 1; b <= ns; ++b) {
      double s = b * hs;
      double ws = simpson_w(b, ns) * std::exp(gamma_logpdf(s, prior.scale_shape, prior.scale_rate));
      double w = wm * ws;
      total += w * (laplace_cdf(hi, mu, s) - laplace_cdf(lo, mu, s));
      norm += w;
    }
  }
  return total / norm;
}

LaplacePrior laplace_window_prior(double lo, double hi, double mass) {
  if (!(hi > lo) || !(mass > 0.0 && mass < 1.0)) throw std::invalid_argument("bad window");
  LaplacePrior p;
  p.location_mean = 0.5 * (lo + hi);
  p.location_sd = (hi - lo) / 8.0;
  p.scale_shape = 4.0;
  double a = 1e-6 * (hi - lo), b = 10.0 * (hi - lo);
  for (int it = 0; it < 50; ++it) {
    double mid = 0.5 * (a + b);
    p.scale_rate = p.scale_shape / mid;
    if (laplace_window_mass(p, lo, hi) > mass) a = mid; else b = mid;
  }
  p.scale_rate = p.scale_shape / (0.5 * (a + b));
  return p;
}

}  // namespace ptree
