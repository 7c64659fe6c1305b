#pragma once

#include <filesystem>
#include <vector>

#include "ptree/config.hpp"
#include "ptree/diagnostics.hpp"
#include "ptree/mcmc.hpp"

namespace ptree {

struct FitResult {
  Draws draws;
  Diagnostics diagnostics;
  std::vector<std::filesystem::path> files;
};

// Loads the config's data, runs the sampler and writes traces.csv, summary.json and plot_*.csv to out_dir.
FitResult fit_to(const Config& cfg, const std::filesystem::path& out_dir);

// Simulates a dataset from the config's truth values into out_dir: data files, truth.json, and
// fit.cfg (the input config with its data paths pointing at the new files). Returns fit.cfg.
std::filesystem::path simulate_to(const Config& cfg, const std::filesystem::path& out_dir);

// Recomputes summaries from a trace file; writes summary.json into out_dir.
Diagnostics diagnose_traces(const std::filesystem::path& traces, const std::filesystem::path& out_dir);

// Curve bands for the config's model from an existing trace file.
std::vector<std::filesystem::path> emit_plot_data(const Config& cfg, const std::filesystem::path& traces,
                                                  const std::filesystem::path& out_dir);

// --threads, else PTREE_ECO_THREADS, else the config value.
int resolve_threads(int cli_value, int config_value);

}  // namespace ptree
