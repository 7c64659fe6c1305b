#include "ptree/rng.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ptree/special.hpp"

namespace ptree {

std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::uniform() {
  for (;;) {
    double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

double Rng::exponential() { return -std::log(uniform()); }

// Marsaglia & Tsang (2000) squeeze method for shape >= 1.
double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be positive");
  if (shape < 1.0) return std::exp(log_gamma_variate(shape));
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    double u = uniform();
    double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::log_gamma_variate(double shape) {
  if (shape >= 1.0) return std::log(gamma(shape));
  // G(a) = G(a+1) * U^(1/a), kept in logs so tiny shapes do not underflow.
  return std::log(gamma(shape + 1.0)) + std::log(uniform()) / shape;
}

double Rng::beta(double a, double b) {
  if (a >= 1.0 && b >= 1.0) {
    double x = gamma(a);
    double y = gamma(b);
    return x / (x + y);
  }
  double lx = log_gamma_variate(a);
  double ly = log_gamma_variate(b);
  return 1.0 / (1.0 + std::exp(ly - lx));
}

std::vector<double> Rng::dirichlet(std::span<const double> alpha) {
  std::vector<double> logs(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) logs[i] = log_gamma_variate(alpha[i]);
  double lse = log_sum_exp(logs);
  std::vector<double> out(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) out[i] = std::exp(logs[i] - lse);
  return out;
}

std::int64_t Rng::binomial(std::int64_t n, double p) {
  if (n <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  std::binomial_distribution<std::int64_t> dist(n, p);
  return dist(engine_);
}

std::int64_t Rng::poisson(double mean) {
  if (mean <= 0.0) return 0;
  std::poisson_distribution<std::int64_t> dist(mean);
  return dist(engine_);
}

std::int64_t Rng::geometric(double q) {
  if (q >= 1.0) return 0;
  if (q <= 0.0) throw std::invalid_argument("geometric success probability must be positive");
  return static_cast<std::int64_t>(std::floor(std::log(uniform()) / std::log1p(-q)));
}

std::size_t Rng::categorical(std::span<const double> probs) {
  double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  double u = uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  for (std::size_t i = probs.size(); i-- > 0;)
    if (probs[i] > 0.0) return i;
  return probs.size() - 1;
}

std::vector<std::int64_t> Rng::multinomial(std::int64_t n, std::span<const double> probs) {
  std::vector<std::int64_t> out(probs.size(), 0);
  double remaining = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (std::size_t i = 0; i + 1 < probs.size() && n > 0; ++i) {
    double p = remaining > 0.0 ? std::min(1.0, probs[i] / remaining) : 0.0;
    out[i] = binomial(n, p);
    n -= out[i];
    remaining -= probs[i];
  }
  if (!probs.empty()) out.back() += n;
  return out;
}

std::size_t Rng::index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

}  // namespace ptree
