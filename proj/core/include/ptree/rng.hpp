#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace ptree {

// Derives an independent stream seed from a master seed (splitmix64 finalizer).
std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 1);

  double uniform();  // open interval (0, 1)
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double exponential();
  double gamma(double shape);                  // unit rate
  double gamma(double shape, double rate) { return gamma(shape) / rate; }
  double log_gamma_variate(double shape);      // log of a Gamma(shape, 1) draw, safe for tiny shapes
  double beta(double a, double b);
  std::vector<double> dirichlet(std::span<const double> alpha);
  std::int64_t binomial(std::int64_t n, double p);
  std::int64_t poisson(double mean);
  // Failures before the first success, success probability q in (0, 1].
  std::int64_t geometric(double q);
  std::size_t categorical(std::span<const double> probs);
  std::vector<std::int64_t> multinomial(std::int64_t n, std::span<const double> probs);
  std::uint64_t next_u64() { return engine_(); }
  std::size_t index(std::size_t n);  // uniform on {0, ..., n-1}

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ptree
