#include "ptree/pg.hpp"

#include <cmath>
#include <stdexcept>

#include "ptree/special.hpp"

namespace ptree {

namespace {

constexpr double kTrunc = 0.64;  // switch point of the two proposal pieces

// n-th coefficient of the alternating series for the J*(1, 0) density.
double series_coef(int n, double x) {
  double k = (n + 0.5) * kPi;
  if (x > kTrunc) return k * std::exp(-0.5 * k * k * x);
  if (x <= 0.0) return 0.0;
  double e = -1.5 * (std::log(0.5 * kPi) + std::log(x)) + std::log(k) - 2.0 * (n + 0.5) * (n + 0.5) / x;
  return std::exp(e);
}

// Probability of proposing from the exponential tail piece.
double tail_weight(double z) {
  double fz = 0.125 * kPi * kPi + 0.5 * z * z;
  double rt = std::sqrt(1.0 / kTrunc);
  double b = rt * (kTrunc * z - 1.0);
  double a = -rt * (kTrunc * z + 1.0);
  double x0 = std::log(fz) + fz * kTrunc;
  double xb = x0 - z + log_normal_cdf(b);
  double xa = x0 + z + log_normal_cdf(a);
  double q_over_p = 4.0 / kPi * (std::exp(xb) + std::exp(xa));
  return 1.0 / (1.0 + q_over_p);
}

// Inverse-Gaussian(1/z, 1) truncated to (0, kTrunc).
double truncated_inverse_gaussian(double z, Rng& rng) {
  if (z < 1.0 / kTrunc) {
    double x = 0.0;
    double accept = 0.0;
    while (rng.uniform() > accept) {
      double e1, e2;
      do {
        e1 = rng.exponential();
        e2 = rng.exponential();
      } while (e1 * e1 > 2.0 * e2 / kTrunc);
      x = 1.0 + e1 * kTrunc;
      x = kTrunc / (x * x);
      accept = std::exp(-0.5 * z * z * x);
    }
    return x;
  }
  double mu = 1.0 / z;
  double x = kTrunc + 1.0;
  while (x > kTrunc) {
    double y = rng.normal();
    y *= y;
    double mu_y = mu * y;
    x = mu + 0.5 * mu * mu_y - 0.5 * mu * std::sqrt(4.0 * mu_y + mu_y * mu_y);
    if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
  }
  return x;
}

}  // namespace

double sample_pg1(double c, Rng& rng) {
  double z = 0.5 * std::fabs(c);
  double fz = 0.125 * kPi * kPi + 0.5 * z * z;
  double w = tail_weight(z);
  for (;;) {
    double x = rng.uniform() < w ? kTrunc + rng.exponential() / fz : truncated_inverse_gaussian(z, rng);
    double s = series_coef(0, x);
    double y = rng.uniform() * s;
    for (int n = 1;; ++n) {
      if (n % 2 == 1) {
        s -= series_coef(n, x);
        if (y <= s) return 0.25 * x;
      } else {
        s += series_coef(n, x);
        if (y > s) break;
      }
    }
  }
}

double sample_pg(const PGParams& p, Rng& rng, const PGConfig& cfg) {
  if (p.b < 1) throw std::invalid_argument("PG shape b must be >= 1");
  if (p.b <= cfg.exact_threshold) {
    double s = 0.0;
    for (std::int64_t i = 0; i < p.b; ++i) s += sample_pg1(p.c, rng);
    return s;
  }
  // PG(b, c) = (1 / 2 pi^2) sum_k g_k / ((k - 1/2)^2 + c^2 / (4 pi^2)), g_k ~ Gamma(b, 1).
  const double b = static_cast<double>(p.b);
  const double c2 = p.c * p.c / (4.0 * kPi * kPi);
  double sum = 0.0, partial_mean = 0.0;
  for (int k = 1; k <= cfg.truncation_terms; ++k) {
    double d = (k - 0.5) * (k - 0.5) + c2;
    sum += rng.gamma(b) / d;
    partial_mean += b / d;
  }
  const double scale = 1.0 / (2.0 * kPi * kPi);
  // Deterministic remainder so the draw has the exact mean.
  return scale * sum + (pg_mean(p) - scale * partial_mean);
}

double pg_mean(const PGParams& p) {
  double b = static_cast<double>(p.b);
  double c = std::fabs(p.c);
  if (c < 1e-6) return b / 4.0 * (1.0 - c * c / 12.0);
  return b / (2.0 * c) * std::tanh(0.5 * c);
}

double pg_variance(const PGParams& p) {
  double b = static_cast<double>(p.b);
  double c = std::fabs(p.c);
  if (c < 1e-3) return b / 24.0 * (1.0 - c * c / 10.0);
  double ch = std::cosh(0.5 * c);
  return b * (std::sinh(c) - c) / (4.0 * c * c * c * ch * ch);
}

}  // namespace ptree
