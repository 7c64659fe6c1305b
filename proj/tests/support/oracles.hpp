#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "ptree/likelihoods.hpp"
#include "ptree/rng.hpp"

namespace ptree::testing {

// Random feasible instances built individual by individual: draw a stay, then captures inside it.
std::pair<CaptureHistoryMatrix, CjsCounts> random_cjs_instance(Rng& rng, int K, int D);
// Open population: individuals with an (entry, exit) interval pair; slice 0 holds those never caught.
std::pair<CaptureHistoryMatrix, OpenCounts> random_opencr_instance(Rng& rng, int K, int D, int never_caught);

// Adaptive 1-D quadrature on (0, 1) (tanh-sinh).
double integrate01(const std::function<double(double)>& f);
// Tensor Gauss-Legendre on (0, 1)^d with `points` nodes per axis.
double integrate_cube(int d, const std::function<double(const std::vector<double>&)>& f, int points = 30);

double beta_pdf(double x, double a, double b);

// Analytic Polya-Gamma moments, written out independently of the library.
double pg_mean_oracle(double b, double c);
double pg_variance_oracle(double b, double c);

// Kolmogorov-Smirnov statistic of a sample against a continuous CDF, and its asymptotic p-value.
double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf);
double ks_pvalue(double d, std::size_t n);
// Two-sample KS statistic and p-value.
double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b);

}  // namespace ptree::testing
