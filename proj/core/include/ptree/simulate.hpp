#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ptree/likelihoods.hpp"
#include "ptree/models.hpp"
#include "ptree/partition.hpp"
#include "ptree/rng.hpp"

namespace ptree {

using CellMatrix = std::vector<std::vector<double>>;

// Independent entry/exit laws restricted to exit after entry.
struct BivariateLaw {
  enum class Kind { Laplace, Normal, Uniform };
  Kind kind = Kind::Laplace;
  double entry_loc = 0.0;
  double entry_scale = 1.0;
  double exit_loc = 1.0;
  double exit_scale = 1.0;
};

// Probability of each (entry unit, exit unit) cell. available_only keeps exit > entry; otherwise the
// diagonal carries half of the product mass. Normalised to 1.
CellMatrix cell_probabilities(const AxisGrid& axis, const BivariateLaw& law, bool available_only);
// Fraction entered (resp. left) before each occasion j = 1..K, from interval cell probabilities.
std::vector<double> entry_cdf(const CellMatrix& cells);
std::vector<double> exit_cdf(const CellMatrix& cells);

// Forward pieces shared with the models' data regeneration.
CaptureHistoryMatrix simulate_cjs_histories(const CjsCounts& n, double p, Rng& rng);
// Histories of slices k >= 1 given the slice matrices: capture at k, then Bernoulli(p) up to the exit.
CaptureHistoryMatrix simulate_open_histories(const OpenCounts& n, double p, Rng& rng);
// Individuals in each (entry, exit) interval cell, captured at each present occasion; returns slices and histories.
std::pair<OpenCounts, CaptureHistoryMatrix> simulate_open_population(const Matrix64& cells, double p, Rng& rng);
// Individuals present at occasions 1..K (index 0 unused) for interval cells f < j <= l.
std::vector<std::int64_t> present_by_occasion(const Matrix64& cells);
// Present at finest units 0..T-1 for unit cells e <= d <= x.
std::vector<std::int64_t> present_by_unit(const Matrix64& cells);
std::vector<std::int64_t> simulate_counts(const std::vector<std::int64_t>& present, double p, Rng& rng);
// Recoveries R[k][k + j] ~ Binomial(pool over rows [first_row, last_row] of column j, lambda).
Matrix64 simulate_recoveries(const std::vector<Matrix64>& counts, double lambda, int first_row, int last_row,
                             Rng& rng);
// Ring-recovery cell probabilities from age-specific survival and a uniform within-LOS split.
CellMatrix rr_cell_probabilities(const std::vector<double>& phi, int U);
Matrix64 draw_cells(std::int64_t n, const CellMatrix& probs, Rng& rng);

struct TruthParams {
  // CJS: survival per tie class and first captures per occasion. RR: survival by age 0..2U-1.
  std::vector<double> phi;
  double p = 0.5;
  std::vector<std::int64_t> releases;
  // JointCRCD.
  BivariateLaw law;
  std::int64_t N = 500;
  double p_capture = 0.3;
  double p_count = 0.5;
  // Resighting variant.
  std::int64_t N_marked = 40;
  std::int64_t N_unmarked = 200;
  double p_r = 0.4;
  double p_c = 0.3;
  // RR.
  double lambda = 0.2;
  std::vector<std::int64_t> marked;
  // HierCounts (per dataset) and LongSeriesOPT (per season).
  std::vector<BivariateLaw> laws;
  std::vector<double> omegas;
  std::vector<double> ps;
  double omega = 200.0;
};

struct SimTruth {
  std::map<std::string, double> values;  // keyed like the fitted model's traces
};

struct SimResult {
  ModelData data;
  SimTruth truth;
};

SimResult simulate(const ModelSpec& spec, const TruthParams& truth, Rng& rng);

}  // namespace ptree
