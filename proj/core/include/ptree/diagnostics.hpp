#pragma once

#include <string>
#include <vector>

#include "ptree/mcmc.hpp"

namespace ptree {

struct EssResult {
  double value = 0.0;
  bool degenerate = false;  // zero variance: ESS is meaningless
};

// Geyer initial positive sequence estimator on one trace.
EssResult effective_sample_size(const std::vector<double>& x);
// Sum of per-chain ESS.
EssResult effective_sample_size(const std::vector<std::vector<double>>& chains);
// Split-chain potential scale reduction; 1.0 for degenerate traces.
double split_rhat(const std::vector<std::vector<double>>& chains);
// Linear interpolation between order statistics (type 7).
double quantile(std::vector<double> x, double q);
double quantile_sorted(const std::vector<double>& sorted, double q);

struct ParamSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q50 = 0.0;
  double q975 = 0.0;
  double ess = 0.0;
  double rhat = 1.0;
  bool degenerate = false;
};

struct CurveBand {
  std::string prefix;
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> lower;
  std::vector<double> upper;
};

struct KernelSummary {
  std::string name;
  bool metropolis = false;
  std::int64_t proposals = 0;
  std::int64_t accepted = 0;
  double rate = 1.0;
};

struct Diagnostics {
  std::vector<ParamSummary> params;
  std::vector<CurveBand> curves;
  std::vector<KernelSummary> kernels;
  const ParamSummary& param(const std::string& name) const;
  const CurveBand& curve(const std::string& prefix) const;
};

Diagnostics diagnose(const Draws& draws);

}  // namespace ptree
