#include "cli.hpp"

#include <cstdio>
#include <iomanip>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ptree/io.hpp"
#include "ptree/run.hpp"

namespace ptree {

namespace {

void print_table(const Diagnostics& d, std::ostream& out) {
  out << std::left << std::setw(28) << "parameter" << std::right << std::setw(12) << "2.5%" << std::setw(12)
      << "mean" << std::setw(12) << "97.5%" << std::setw(10) << "ess" << std::setw(8) << "rhat" << "\n";
  for (const auto& p : d.params) {
    out << std::left << std::setw(28) << p.name << std::right << std::setprecision(4) << std::setw(12) << p.q025
        << std::setw(12) << p.mean << std::setw(12) << p.q975 << std::setw(10) << std::setprecision(0) << std::fixed
        << p.ess << std::setw(8) << std::setprecision(3) << p.rhat << std::defaultfloat << "\n";
  }
  for (const auto& k : d.kernels)
    if (k.metropolis) out << "kernel " << k.name << ": acceptance " << k.rate << "\n";
}

Config with_overrides(const std::string& path, std::optional<std::uint64_t> seed, int threads) {
  Config c = load_config(path);
  if (seed) {
    c.run.seed = *seed;
    c.sim_seed = *seed;
  }
  c.run.threads = resolve_threads(threads, c.run.threads);
  return c;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Polya tree models for open wildlife populations", "ptree-eco"};
  app.require_subcommand(1);
  app.set_version_flag("--version", library_version());

  std::string config, traces, out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "run config (flat key = value file)")->required();
    sub->add_option("--seed", seed, "overrides the config seed");
    sub->add_option("--threads", threads, "chains run concurrently (fallback: PTREE_ECO_THREADS)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "output directory (default: config 'output')");
  };
  auto* sim = app.add_subcommand("simulate", "simulate a dataset from the config's truth_* values");
  add_common(sim);
  auto* fit = app.add_subcommand("fit", "fit the config's model to its data");
  add_common(fit);
  auto* diag = app.add_subcommand("diagnose", "summaries and convergence checks from a trace file");
  diag->add_option("--traces", traces, "traces.csv from fit")->required();
  diag->add_option("--out", out_dir, "output directory (default: the trace file's directory)");
  auto* plot = app.add_subcommand("emit-plot-data", "entry/exit curve bands from a trace file");
  add_common(plot);
  plot->add_option("--traces", traces, "traces.csv from fit")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << library_version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*sim) {
      Config c = with_overrides(config, seed, threads);
      auto dir = out_dir.empty() ? c.output : std::filesystem::path(out_dir);
      auto cfg = simulate_to(c, dir);
      out << "wrote " << cfg.string() << "\n";
    } else if (*fit) {
      Config c = with_overrides(config, seed, threads);
      auto dir = out_dir.empty() ? c.output : std::filesystem::path(out_dir);
      auto r = fit_to(c, dir);
      print_table(r.diagnostics, out);
      for (const auto& f : r.files) out << "wrote " << f.string() << "\n";
    } else if (*diag) {
      std::filesystem::path t = traces;
      auto dir = out_dir.empty() ? t.parent_path() : std::filesystem::path(out_dir);
      print_table(diagnose_traces(t, dir), out);
    } else if (*plot) {
      Config c = with_overrides(config, seed, threads);
      auto dir = out_dir.empty() ? c.output : std::filesystem::path(out_dir);
      for (const auto& f : emit_plot_data(c, traces, dir)) out << "wrote " << f.string() << "\n";
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 3;
  } catch (const McmcError& e) {
    err << "sampler failure at iteration " << e.iteration() << " in kernel " << e.kernel() << ": " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}

}  // namespace ptree
