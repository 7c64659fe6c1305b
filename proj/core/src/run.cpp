#include "ptree/run.hpp"

#include <cstdlib>
#include <fstream>

#include "ptree/io.hpp"
#include "ptree/simulate.hpp"

namespace ptree {

namespace fs = std::filesystem;

FitResult fit_to(const Config& cfg, const fs::path& out_dir) {
  ModelData data = load_data(cfg);
  auto model = build_model(cfg.spec, data);
  FitResult r;
  r.draws = run(*model, cfg.run);
  r.draws.provenance.config_hash = cfg.hash();
  r.diagnostics = diagnose(r.draws);
  fs::create_directories(out_dir);
  write_traces(r.draws, out_dir / "traces.csv");
  write_summary(r.draws, r.diagnostics, out_dir / "summary.json");
  r.files = {out_dir / "traces.csv", out_dir / "summary.json"};
  for (auto& p : write_plot_data(r.diagnostics, out_dir)) r.files.push_back(p);
  return r;
}

fs::path simulate_to(const Config& cfg, const fs::path& out_dir) {
  Rng rng(cfg.sim_seed);
  SimResult sim = simulate(cfg.spec, cfg.truth, rng);
  auto entries = cfg.entries;
  for (const char* k : {"histories", "counts", "counts_manifest", "recoveries", "markings", "recoveries_juvenile",
                        "recoveries_adult", "markings_juvenile", "markings_adult", "resight_1", "resight_2"})
    entries.erase(k);
  fs::path abs = fs::absolute(out_dir);
  for (auto& [k, v] : save_data(cfg.spec, sim.data, abs)) entries[k] = v;
  write_truth(sim.truth, abs / "truth.json");
  fs::path out = abs / "fit.cfg";
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot write '" + out.string() + "'");
  f << format_config(entries);
  return out;
}

Diagnostics diagnose_traces(const fs::path& traces, const fs::path& out_dir) {
  Draws d = read_traces(traces);
  Diagnostics diag = diagnose(d);
  fs::create_directories(out_dir);
  write_summary(d, diag, out_dir / "summary.json");
  return diag;
}

std::vector<fs::path> emit_plot_data(const Config& cfg, const fs::path& traces, const fs::path& out_dir) {
  ModelData data = load_data(cfg);
  auto model = build_model(cfg.spec, data);
  Draws d = read_traces(traces);
  d.axes = model->plot_axes();
  for (const auto& a : d.axes)
    for (std::size_t i = 0; i < a.x.size(); ++i)
      if (!d.has(a.prefix + "[" + std::to_string(i + 1) + "]"))
        throw DataError(traces.string() + ": trace file lacks column " + a.prefix + "[" + std::to_string(i + 1) + "]");
  return write_plot_data(diagnose(d), out_dir);
}

int resolve_threads(int cli_value, int config_value) {
  if (cli_value > 0) return cli_value;
  if (const char* env = std::getenv("PTREE_ECO_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v > 0) return static_cast<int>(v);
    throw ConfigError(std::string("PTREE_ECO_THREADS must be a positive integer, got '") + env + "'");
  }
  return config_value;
}

}  // namespace ptree
