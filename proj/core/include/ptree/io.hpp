#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ptree/config.hpp"
#include "ptree/diagnostics.hpp"
#include "ptree/likelihoods.hpp"
#include "ptree/mcmc.hpp"
#include "ptree/models.hpp"
#include "ptree/simulate.hpp"

namespace ptree {

namespace fs = std::filesystem;

// Readers throw DataError naming file, row and column (both 1-based). CSV: comma separated, LF,
// an optional header line is recognised by a non-numeric first field.
CaptureHistoryMatrix read_capture_histories(const fs::path& path);
std::vector<std::int64_t> read_counts(const fs::path& path);
// One count file per line, relative to the manifest's directory.
std::vector<std::vector<std::int64_t>> read_counts_manifest(const fs::path& path);
Matrix64 read_matrix(const fs::path& path);
// Upper-triangular recoveries and markings; rejects below-diagonal entries and rows above markings.
std::pair<Matrix64, std::vector<std::int64_t>> read_rr(const fs::path& recoveries, const fs::path& markings);

void write_capture_histories(const CaptureHistoryMatrix& h, const fs::path& path);
void write_counts(const std::vector<std::int64_t>& c, const fs::path& path);
void write_matrix(const Matrix64& m, const fs::path& path);

ModelData load_data(const Config& cfg);
// Writes every data file spec.kind reads into dir; returns config entries pointing at them.
std::map<std::string, std::string> save_data(const ModelSpec& spec, const ModelData& data, const fs::path& dir);

// Traces: header `chain,draw,<names>`, one row per retained draw, shortest round-trip decimals.
void write_traces(const Draws& draws, const fs::path& path);
Draws read_traces(const fs::path& path);
// Provenance, kernel acceptance and per-parameter summaries.
void write_summary(const Draws& draws, const Diagnostics& diag, const fs::path& path);
// One CSV per curve family: x,mean,lower,upper.
std::vector<fs::path> write_plot_data(const Diagnostics& diag, const fs::path& dir);
void write_truth(const SimTruth& truth, const fs::path& path);
SimTruth read_truth(const fs::path& path);

// Shortest decimal string that reads back to the same double.
std::string format_double(double x);

}  // namespace ptree
