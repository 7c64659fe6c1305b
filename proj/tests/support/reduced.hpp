#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ptree/models.hpp"
#include "ptree/simulate.hpp"

namespace ptree::testing {

// Smallest instances of each model, built from a simulated dataset so every shape is valid.
struct Reduced {
  std::string name;
  ModelSpec spec;
  std::unique_ptr<Model> model;
};

std::unique_ptr<Model> model_from_truth(const ModelSpec& spec, const TruthParams& truth, std::uint64_t seed = 1);

// S datasets of n observations on a single dyadic split with an HLPT prior.
std::unique_ptr<Model> make_hlpt_toy(int datasets, int n, double sigma, double tau, double mu0);

Reduced reduced_hlpt();
Reduced reduced_cjs(CjsConstraint mode = CjsConstraint::Age);
Reduced reduced_rr(bool juvenile_split = false);
Reduced reduced_hier();
Reduced reduced_long();
Reduced reduced_joint();
Reduced reduced_resight();

std::vector<Reduced> all_reduced();

}  // namespace ptree::testing
