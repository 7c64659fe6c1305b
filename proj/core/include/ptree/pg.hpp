#pragma once

#include <cstdint>

#include "ptree/rng.hpp"

namespace ptree {

struct PGParams {
  std::int64_t b = 1;
  double c = 0.0;
};

struct PGConfig {
  std::int64_t exact_threshold = 20;  // b at or below uses the exact composition
  int truncation_terms = 200;         // gamma terms in the series route
};

double sample_pg(const PGParams& p, Rng& rng, const PGConfig& cfg = {});
// One PG(1, c) draw by Devroye-style alternating-series rejection.
double sample_pg1(double c, Rng& rng);
double pg_mean(const PGParams& p);
double pg_variance(const PGParams& p);

}  // namespace ptree
