#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "ptree/hlpt.hpp"
#include "ptree/mcmc.hpp"
#include "ptree/rng.hpp"

namespace ptree {

struct BetaPrior {
  double a = 1.0;
  double b = 1.0;
};

struct GammaPrior {
  double shape = 1.0;
  double rate = 0.01;
  static GammaPrior from_mean_variance(double mean, double variance);
  double mean() const { return shape / rate; }
};

// Split variable of a dyadic tie class from pooled counts: Beta(a + successes, b + remainder).
double kernel_beta_V(std::int64_t successes, std::int64_t remainder, double a, double b, Rng& rng);
// Multiway node: Dirichlet(alpha + counts).
std::vector<double> kernel_dirichlet(std::span<const std::int64_t> counts, std::span<const double> alpha, Rng& rng);
// Capture probability from capture and availability totals: Beta(a + captured, b + available - captured).
double kernel_p_capture(std::int64_t captured, std::int64_t available, Rng& rng, BetaPrior prior = {});

// Two resighting channels; the first also sees unmarked individuals through occasion counts.
struct ResightTotals {
  std::int64_t channel1_marked_hits = 0;  // sum of H1
  std::int64_t marked_available = 0;      // sum over occasions of marked individuals present
  std::int64_t unmarked_hits = 0;         // sum of unmarked counts
  std::int64_t unmarked_available = 0;    // sum over occasions of unmarked individuals present
  std::int64_t channel2_marked_hits = 0;  // sum of H2
};
// Returns (p_R, p_C): channel 1 and channel 2 detection probabilities.
std::pair<double, double> kernel_p_resight_pair(const ResightTotals& t, Rng& rng, BetaPrior prior_r = {},
                                                BetaPrior prior_c = {});
double kernel_lambda(std::int64_t recoveries, std::int64_t pooled, Rng& rng, BetaPrior prior = {});
// Poisson intensity with a Gamma prior given a realised Poisson count.
double kernel_intensity(std::int64_t total, const GammaPrior& prior, Rng& rng);

// Geometric-size moves on a block of non-negative counts.
//  Free: one cell gains or loses delta (sign fair), delta ~ Geometric(q) on {0, 1, ...}.
//  Transfer: delta moves from one cell to another, keeping the block total fixed.
// Both proposals are symmetric; log_proposal evaluates the forward density for audits.
class CountMover {
 public:
  enum class Mode { Free, Transfer };
  struct Move {
    int from = -1;  // Transfer source; unused for Free
    int to = 0;     // Free: the cell; Transfer: destination
    std::int64_t delta = 0;  // Free: signed change
  };

  CountMover(Mode mode = Mode::Free, double q = 0.5, double target = 0.25);
  Move propose(int cells, Rng& rng) const;
  // Applies a move; false (and no change) if a cell would go negative.
  bool apply(const Move& m, std::span<std::int64_t> x) const;
  void undo(const Move& m, std::span<std::int64_t> x) const;
  double log_proposal(std::span<const std::int64_t> from, std::span<const std::int64_t> to) const;
  // Records an outcome; while adapting, every 50 proposals nudges q toward the target acceptance.
  void record(bool accepted, bool adapt);
  double q() const { return q_; }
  Mode mode() const { return mode_; }
  KernelStats take_stats();

 private:
  Mode mode_;
  double q_;
  double target_;
  std::int64_t window_prop_ = 0;
  std::int64_t window_acc_ = 0;
  KernelStats stats_;
};

// Metropolis step: accepts with probability min(1, exp(log_ratio)).
bool mh_accept(double log_ratio, Rng& rng);

// Random-walk MH on hyperparameters against a (marginal) log target.
KernelStats kernel_mh_hyper(std::vector<double>& x, const std::function<double(const std::vector<double>&)>& log_target,
                            AdaptiveRandomWalk& rw, Rng& rng, bool adapt);

// Individual availability interval (t1, t2), occasions 1..K. Proposal uniform on the 3x3 neighbourhood;
// moves leaving 1 <= t1 <= first_seen, last_seen <= t2 <= K are rejected.
bool kernel_rw_interval(int& t1, int& t2, int first_seen, int last_seen, int K,
                        const std::function<double(int, int)>& log_target, Rng& rng);

}  // namespace ptree
