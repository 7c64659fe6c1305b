#include "ptree/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace ptree {

double log_gamma(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

namespace {
constexpr std::int64_t kFactTable = 4096;

const std::array<double, kFactTable>& fact_table() {
  static const std::array<double, kFactTable> table = [] {
    std::array<double, kFactTable> t{};
    t[0] = 0.0;
    for (std::int64_t i = 1; i < kFactTable; ++i) t[i] = t[i - 1] + std::log(static_cast<double>(i));
    return t;
  }();
  return table;
}
}  // namespace

double log_factorial(std::int64_t n) {
  if (n < 0) return kNegInf;
  if (n < kFactTable) return fact_table()[static_cast<std::size_t>(n)];
  return log_gamma(static_cast<double>(n) + 1.0);
}

double log_binom(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) return kNegInf;
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

double log_beta_fn(double a, double b) { return log_gamma(a) + log_gamma(b) - log_gamma(a + b); }

double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return kNegInf;
  double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

double inv_logit(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double log1p_exp(double x) {
  if (x > 35.0) return x;
  if (x < -35.0) return std::exp(x);
  return std::log1p(std::exp(x));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double log_normal_cdf(double x) {
  if (x > -5.0) return std::log(normal_cdf(x));
  // Asymptotic tail; accurate to ~1e-8 relative for x < -5.
  double x2 = x * x;
  double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * kPi) + std::log(series);
}

double binomial_logpmf(std::int64_t k, std::int64_t n, double p) {
  if (k < 0 || k > n) return kNegInf;
  double out = log_binom(n, k);
  if (k > 0) out += (p <= 0.0 ? kNegInf : static_cast<double>(k) * std::log(p));
  if (n - k > 0) out += (p >= 1.0 ? kNegInf : static_cast<double>(n - k) * std::log1p(-p));
  return out;
}

double poisson_logpmf(std::int64_t k, double mean) {
  if (k < 0) return kNegInf;
  if (mean <= 0.0) return k == 0 ? 0.0 : kNegInf;
  return static_cast<double>(k) * std::log(mean) - mean - log_factorial(k);
}

double beta_logpdf(double x, double a, double b) {
  if (x <= 0.0 || x >= 1.0) return kNegInf;
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta_fn(a, b);
}

double gamma_logpdf(double x, double shape, double rate) {
  if (x <= 0.0) return kNegInf;
  return shape * std::log(rate) - log_gamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double normal_logpdf(double x, double mean, double sd) {
  double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * kPi);
}

}  // namespace ptree
