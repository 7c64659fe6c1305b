#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptree/rng.hpp"

namespace ptree {

struct RunConfig {
  std::int64_t iterations = 10000;
  std::int64_t burn_in = 5000;
  std::int64_t thin = 1;
  int chains = 4;
  std::uint64_t seed = 1;
  int threads = 1;
  double geometric_q = 0.5;       // initial success probability of count-move sizes
  double count_target_accept = 0.25;
  void validate() const;
};

struct KernelStats {
  std::int64_t proposals = 0;
  std::int64_t accepted = 0;
  KernelStats& operator+=(const KernelStats& o) {
    proposals += o.proposals;
    accepted += o.accepted;
    return *this;
  }
  double rate() const { return proposals ? static_cast<double>(accepted) / static_cast<double>(proposals) : 1.0; }
};

// One update in a model's sweep. `targets` names the unknowns the kernel owns; MH kernels report proposals.
struct Kernel {
  std::string name;
  std::vector<std::string> targets;
  bool metropolis = false;
  std::function<KernelStats(Rng&, bool adapting)> step;
};

// Grid on which a family of traced curve values lives (e.g. entry CDF at each occasion time).
struct PlotAxis {
  std::string prefix;     // trace columns are prefix[0], prefix[1], ...
  std::vector<double> x;
};

class Model {
 public:
  virtual ~Model() = default;
  virtual std::string kind() const = 0;
  // Every unknown of the chain state, by name.
  virtual std::vector<std::string> unknowns() const = 0;
  // Sweep schedule; closures refer to this instance.
  virtual std::vector<Kernel> kernels() = 0;
  virtual std::vector<std::string> trace_names() const = 0;
  virtual void trace(std::vector<double>& out) const = 0;
  virtual std::vector<PlotAxis> plot_axes() const { return {}; }
  // Feasible starting state.
  virtual void initialize(Rng& rng) = 0;
  virtual std::unique_ptr<Model> clone() const = 0;
  // Throws std::logic_error if a structural invariant of the state is broken.
  virtual void check_state() const {}
  // Forward simulation support (Geweke tests): draw every unknown from the prior, and
  // redraw the observed data given the current unknowns.
  virtual void draw_prior(Rng&) { throw std::logic_error(kind() + " does not support prior simulation"); }
  virtual void regenerate_data(Rng&) { throw std::logic_error(kind() + " does not support data regeneration"); }
};

// Unknowns must equal the union of kernel targets with no unknown owned twice.
void audit_kernels(Model& model);

class McmcError : public std::runtime_error {
 public:
  McmcError(const std::string& what, std::int64_t iteration, std::string kernel)
      : std::runtime_error(what), iteration_(iteration), kernel_(std::move(kernel)) {}
  std::int64_t iteration() const { return iteration_; }
  const std::string& kernel() const { return kernel_; }

 private:
  std::int64_t iteration_;
  std::string kernel_;
};

struct Provenance {
  std::uint64_t seed = 0;
  int chains = 0;
  int threads = 0;
  std::int64_t iterations = 0;
  std::int64_t burn_in = 0;
  std::int64_t thin = 1;
  std::string model;
  std::string version;
  std::string config_hash;
};

struct ChainDraws {
  std::vector<std::vector<double>> rows;  // retained draws, one row per iteration
  std::vector<KernelStats> kernels;       // post-burn-in statistics per kernel
};

struct Draws {
  std::vector<std::string> names;
  std::vector<std::string> kernel_names;
  std::vector<bool> kernel_is_mh;
  std::vector<ChainDraws> chains;
  std::vector<PlotAxis> axes;
  Provenance provenance;

  std::size_t column(const std::string& name) const;
  bool has(const std::string& name) const;
  std::vector<double> trace(std::size_t chain, std::size_t col) const;
  std::vector<std::vector<double>> traces(std::size_t col) const;
  std::vector<double> pooled(std::size_t col) const;
  std::vector<double> pooled(const std::string& name) const { return pooled(column(name)); }
  double mean(const std::string& name) const;
  KernelStats kernel_stats(const std::string& kernel) const;
  std::size_t retained() const { return chains.empty() ? 0 : chains[0].rows.size(); }
};

const char* library_version();

// Runs cfg.chains independent chains, each on its own RNG stream split_seed(seed, chain).
Draws run(const Model& prototype, const RunConfig& cfg);

// One sweep of every kernel; used by run and by the Geweke harness.
void sweep(std::vector<Kernel>& kernels, Rng& rng, bool adapting, std::vector<KernelStats>* stats,
           std::int64_t iteration = 0);

}  // namespace ptree
