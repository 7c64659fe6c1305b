#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptree/hlpt.hpp"
#include "ptree/kernels.hpp"
#include "ptree/likelihoods.hpp"
#include "ptree/mcmc.hpp"
#include "ptree/partition.hpp"
#include "ptree/polya_tree.hpp"
#include "ptree/replicate.hpp"

namespace ptree {

enum class ModelKind { CJS, JointCRCD, RR, HierCounts, LongSeriesOPT };
const char* model_kind_name(ModelKind k);
ModelKind parse_model_kind(const std::string& s);

// Data that does not fit the model specification; the message names the offending cell.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelSpec {
  ModelKind kind = ModelKind::CJS;
  std::vector<double> times;  // occasion times t_1..t_K

  // Detection-type probabilities (p, p_C, p_D, p_R, lambda, p_s) share this Beta prior.
  BetaPrior detection;
  // CJS split variables V ~ Beta(a, b).
  BetaPrior split;
  CjsConstraint constraint = CjsConstraint::Age;

  // Open population: symmetric Beta on every dyadic node; exit chains tied across entry cells.
  double dirichlet_alpha = 0.5;
  bool tie_exit = true;
  GammaPrior intensity = GammaPrior::from_mean_variance(50.0, 4000.0);
  // Resighting variant: marked resighted individuals with two channels plus unmarked counts.
  bool resight = false;
  GammaPrior intensity_unmarked = GammaPrior::from_mean_variance(50.0, 4000.0);

  // Ring recovery.
  int U = 18;
  bool juvenile_split = false;
  double hyper_lo = 0.1;
  double hyper_hi = 100.0;
  double rr_exit_concentration = 1.0;  // total Dirichlet mass of each within-LOS split

  // Hierarchical count model.
  double hlpt_sigma = 1.0;
  double hlpt_tau = 1.0;
  LaplacePrior entry_prior;
  LaplacePrior exit_prior;

  // Long series.
  NestedPeriodSpec nested;
  double rho = 0.1;
  double gp_sigma0 = 1.0;
  double gp_length = 1.0;
  double centre_entry_mean = -1.0;  // in finest units; negative means season fraction 0.25
  double centre_entry_sd = -1.0;
  double centre_exit_mean = -1.0;
  double centre_exit_sd = -1.0;

  int occasions() const { return static_cast<int>(times.size()); }
  SamplingGrid grid() const { return SamplingGrid(times); }
  // Defaults that depend on the model kind (intensity prior, centering windows).
  static ModelSpec defaults(ModelKind kind, std::vector<double> times);
  void validate() const;
};

struct ModelData {
  CaptureHistoryMatrix histories;                   // CJS, JointCRCD
  std::vector<std::vector<std::int64_t>> counts;    // JointCRCD: one series; HierCounts: S; LongSeriesOPT: seasons
  Matrix64 recoveries;                              // RR, unsplit
  std::vector<std::int64_t> marked;
  Matrix64 recoveries_juvenile, recoveries_adult;   // RR, juvenile split
  std::vector<std::int64_t> marked_juvenile, marked_adult;
  // Resighting variant: per marked resighted individual, channel 1 and channel 2 histories.
  std::vector<std::vector<std::uint8_t>> resight_1, resight_2;
};

// Checks shapes against the spec; throws DataError.
void validate_data(const ModelSpec& spec, const ModelData& data);

std::unique_ptr<Model> build_model(const ModelSpec& spec, const ModelData& data);

// Individual models, exposed for tests.
std::unique_ptr<Model> make_cjs_model(const ModelSpec& spec, const ModelData& data);
std::unique_ptr<Model> make_joint_model(const ModelSpec& spec, const ModelData& data);
std::unique_ptr<Model> make_resight_model(const ModelSpec& spec, const ModelData& data);
std::unique_ptr<Model> make_rr_model(const ModelSpec& spec, const ModelData& data);
std::unique_ptr<Model> make_hier_model(const ModelSpec& spec, const ModelData& data);
std::unique_ptr<Model> make_long_model(const ModelSpec& spec, const ModelData& data);

// Dyadic HLPT over S datasets sharing one tree:
// beta[s][node] ~ N(mu[node], sigma^2), mu[node] ~ N(mu0[node], tau^2); P(child 0) = logistic(beta).
struct HlptDyadic {
  std::shared_ptr<const PartitionTree> tree;
  double sigma = 1.0;
  double tau = 1.0;
  std::vector<double> mu0;
  std::vector<double> mu;
  std::vector<std::vector<double>> beta;
  std::vector<std::vector<double>> omega;
  PGConfig pg;

  HlptDyadic() = default;
  HlptDyadic(std::shared_ptr<const PartitionTree> t, int datasets, double sigma, double tau, std::vector<double> mu0);
  int datasets() const { return static_cast<int>(beta.size()); }
  void draw_prior(Rng& rng);
  // counts[s][node] = per-child counts. PG auxiliaries, then (mu, beta) as a block given them.
  void sweep(const std::vector<std::vector<std::vector<std::int64_t>>>& counts, Rng& rng);
  std::vector<double> leaf_masses(int s) const;
};

}  // namespace ptree
