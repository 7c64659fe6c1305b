#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ptree/partition.hpp"
#include "ptree/pg.hpp"
#include "ptree/rng.hpp"

namespace ptree {

struct NormalMoments {
  double mean = 0.0;
  double variance = 1.0;
};

// Probabilities over arity = beta.size() + 1 children; the last child is the reference.
std::vector<double> logistic_split_probs(std::span<const double> beta);
// Probabilities over a subset of categories (reference = last category, always feasible).
std::vector<double> logistic_split_probs(std::span<const double> beta, const std::vector<bool>& feasible);

// beta | omega for a dyadic node with n0 of n in child 0.
NormalMoments beta_dyadic_moments(std::int64_t n0, std::int64_t n, double pg_omega, double mu, double sigma);
double gibbs_beta_dyadic(std::int64_t n0, std::int64_t n, double pg_omega, double mu, double sigma, Rng& rng);
// omega | beta ~ PG(n, beta); returns 0 when n = 0.
double gibbs_pg_aux(std::int64_t n, double beta, Rng& rng, const PGConfig& cfg = {});

// One-vs-rest update of beta[j] for a multinomial node; counts has arity entries.
NormalMoments multinomial_entry_moments(std::size_t j, std::span<const std::int64_t> counts,
                                        std::span<const double> beta, double pg_omega, double mu, double sigma);
double multinomial_pg_entry_update(std::size_t j, std::span<const std::int64_t> counts, std::vector<double>& beta,
                                   double mu, double sigma, Rng& rng, const PGConfig& cfg = {});

// One entry group sharing exit coefficients: counts per exit category and which categories are feasible.
struct ExitGroup {
  std::vector<std::int64_t> counts;
  std::vector<bool> feasible;
};
NormalMoments multinomial_exit_moments(std::size_t j, const std::vector<ExitGroup>& groups,
                                       std::span<const double> beta, std::span<const double> pg_omegas, double mu,
                                       double sigma);
double multinomial_pg_exit_update(std::size_t j, const std::vector<ExitGroup>& groups, std::vector<double>& beta,
                                  double mu, double sigma, Rng& rng, const PGConfig& cfg = {});

struct GPHyper {
  double sigma0 = 1.0;
  double length_scale = 1.0;
  std::vector<double> mu0;
};
Eigen::MatrixXd gp_covariance(std::size_t n, double sigma0, double length_scale);
// Conjugate posterior of the shared means given per-dataset coefficient vectors (rows of beta_panel).
void gp_mean_posterior(const std::vector<std::vector<double>>& beta_panel, const GPHyper& hyper, double sigma,
                       Eigen::VectorXd& mean, Eigen::MatrixXd& cov);
std::vector<double> gp_mean_update(const std::vector<std::vector<double>>& beta_panel, const GPHyper& hyper,
                                   double sigma, Rng& rng);

// Shared mean of a dyadic node with the per-dataset betas integrated out given their PG auxiliaries.
// kappa[s] = n0_s - n_s / 2; datasets with omega[s] = 0 carry no information.
NormalMoments collapsed_mean_moments(std::span<const double> kappa, std::span<const double> omega, double m0,
                                     double s0, double sigma);

// Gaussian random-walk Metropolis with per-coordinate scales adapted toward a target acceptance rate.
class AdaptiveRandomWalk {
 public:
  AdaptiveRandomWalk(std::vector<double> scales, double target = 0.3);
  // One coordinate-wise sweep; returns the number of accepted proposals.
  int sweep(std::vector<double>& x, const std::function<double(const std::vector<double>&)>& log_target, Rng& rng,
            bool adapt);
  const std::vector<double>& scales() const { return scales_; }
  std::int64_t proposals() const { return proposals_; }
  std::int64_t accepted() const { return accepted_; }

 private:
  std::vector<double> scales_;
  std::vector<std::int64_t> window_prop_;
  std::vector<std::int64_t> window_acc_;
  double target_;
  std::int64_t proposals_ = 0;
  std::int64_t accepted_ = 0;
};

// Double-exponential (Laplace) helpers used by the centering presets.
double laplace_cdf(double x, double location, double scale);
// Leaf masses of an ordered bivariate tree under independent entry/exit laws restricted to exit >= entry.
// Diagonal units carry half of the product mass (the exit-after-entry half of the unit square).
std::vector<double> product_leaf_masses(const PartitionTree& tree, const std::function<double(double)>& entry_cdf,
                                        const std::function<double(double)>& exit_cdf);
// Centering coefficients beta0 per node: log(G0(child c) / G0(last child)).
std::vector<std::vector<double>> centering_logits(const PartitionTree& tree, const std::vector<double>& leaf_mass);

// Prior on a Laplace (location, scale) pair: location ~ N(mean, sd^2), scale ~ Gamma(shape, rate).
struct LaplacePrior {
  double location_mean = 0.0;
  double location_sd = 1.0;
  double scale_shape = 4.0;
  double scale_rate = 4.0;
};
// Prior-predictive probability that a Laplace draw falls in [lo, hi].
double laplace_window_mass(const LaplacePrior& prior, double lo, double hi);
// Chooses the scale hyperprior so the prior-predictive mass in [lo, hi] equals `mass` (bisection).
LaplacePrior laplace_window_prior(double lo, double hi, double mass = 0.95);

}  // namespace ptree
