#pragma once

#include <cstdint>
#include <limits>
#include <span>

namespace ptree {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

// Thread-safe log-gamma (glibc lgamma writes the global signgam).
double log_gamma(double x);
double log_factorial(std::int64_t n);
double log_binom(std::int64_t n, std::int64_t k);  // -inf outside 0 <= k <= n
double log_beta_fn(double a, double b);
double log_sum_exp(std::span<const double> xs);
double log_add_exp(double a, double b);
double logit(double p);
double inv_logit(double x);
double log1p_exp(double x);  // log(1 + e^x), stable
double normal_cdf(double x);
double log_normal_cdf(double x);
double binomial_logpmf(std::int64_t k, std::int64_t n, double p);
double poisson_logpmf(std::int64_t k, double mean);
double beta_logpdf(double x, double a, double b);
double gamma_logpdf(double x, double shape, double rate);
double normal_logpdf(double x, double mean, double sd);

}  // namespace ptree
