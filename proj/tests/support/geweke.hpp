#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ptree/mcmc.hpp"

namespace ptree::testing {

struct GewekeOptions {
  int forward_draws = 50000;   // independent prior + data draws
  int chain_sweeps = 50000;    // successive-conditional iterations
  int burn_in = 500;
  int batches = 50;            // batch means for the chain's standard error
  bool squares = true;         // also compare second moments
  std::uint64_t seed = 1;
};

struct GewekeStat {
  std::string name;
  double forward_mean = 0.0;
  double chain_mean = 0.0;
  double z = 0.0;
};

struct GewekeResult {
  std::vector<GewekeStat> stats;
  std::vector<std::string> kernels;
  double max_abs_z = 0.0;
  std::string worst;
  std::string report(int top = 5) const;
};

// Successive-conditional test: moments of the traced functionals under independent forward
// simulation vs. a chain alternating one full sweep with data regeneration.
GewekeResult geweke(const Model& prototype, const GewekeOptions& opt);

// Batch-means standard error of the mean of a correlated series.
double batch_means_se(const std::vector<double>& x, int batches);

}  // namespace ptree::testing
