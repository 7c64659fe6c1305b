#include "ptree/mcmc.hpp"

#include <algorithm>
#include <exception>
#include <numeric>
#include <set>
#include <thread>

namespace ptree {

#ifndef PTREE_VERSION
#define PTREE_VERSION "0.0.0"
#endif

const char* library_version() { return PTREE_VERSION; }

void RunConfig::validate() const {
  if (iterations <= 0) throw std::invalid_argument("iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations) throw std::invalid_argument("need 0 <= burn_in < iterations");
  if (thin < 1) throw std::invalid_argument("thin must be >= 1");
  if (chains < 1) throw std::invalid_argument("chains must be >= 1");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (!(geometric_q > 0.0 && geometric_q <= 1.0)) throw std::invalid_argument("geometric_q must be in (0, 1]");
}

void audit_kernels(Model& model) {
  auto unknowns = model.unknowns();
  std::set<std::string> wanted(unknowns.begin(), unknowns.end());
  if (wanted.size() != unknowns.size()) throw std::logic_error("duplicate unknown names in " + model.kind());
  std::map<std::string, std::string> owner;
  for (const Kernel& k : model.kernels()) {
    for (const auto& t : k.targets) {
      if (!wanted.count(t)) throw std::logic_error("kernel " + k.name + " targets unknown '" + t + "' not in the state");
      auto [it, fresh] = owner.emplace(t, k.name);
      if (!fresh) throw std::logic_error("unknown '" + t + "' owned by both " + it->second + " and " + k.name);
    }
  }
  for (const auto& u : wanted)
    if (!owner.count(u)) throw std::logic_error("unknown '" + u + "' has no kernel");
}

void sweep(std::vector<Kernel>& kernels, Rng& rng, bool adapting, std::vector<KernelStats>* stats,
           std::int64_t iteration) {
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    KernelStats s;
    try {
      s = kernels[i].step(rng, adapting);
    } catch (const McmcError&) {
      throw;
    } catch (const std::exception& e) {
      throw McmcError("kernel '" + kernels[i].name + "' failed at iteration " + std::to_string(iteration) + ": " +
                          e.what(),
                      iteration, kernels[i].name);
    }
    if (stats) (*stats)[i] += s;
  }
}

namespace {
ChainDraws run_chain(const Model& prototype, const RunConfig& cfg, int chain) {
  auto model = prototype.clone();
  Rng rng(split_seed(cfg.seed, static_cast<std::uint64_t>(chain)));
  model->initialize(rng);
  auto kernels = model->kernels();
  ChainDraws out;
  out.kernels.assign(kernels.size(), {});
  const std::size_t width = model->trace_names().size();
  std::vector<double> row;
  for (std::int64_t it = 0; it < cfg.iterations; ++it) {
    bool burning = it < cfg.burn_in;
    sweep(kernels, rng, burning, burning ? nullptr : &out.kernels, it);
    if (!burning && (it - cfg.burn_in) % cfg.thin == 0) {
      row.clear();
      model->trace(row);
      if (row.size() != width)
        throw std::logic_error(model->kind() + " traced " + std::to_string(row.size()) + " values for " +
                               std::to_string(width) + " names");
      out.rows.push_back(row);
    }
  }
  model->check_state();
  return out;
}
}  // namespace

Draws run(const Model& prototype, const RunConfig& cfg) {
  cfg.validate();
  Draws d;
  auto probe = prototype.clone();
  audit_kernels(*probe);
  d.names = probe->trace_names();
  for (const auto& k : probe->kernels()) {
    d.kernel_names.push_back(k.name);
    d.kernel_is_mh.push_back(k.metropolis);
  }
  d.axes = probe->plot_axes();
  d.chains.resize(cfg.chains);
  std::vector<std::exception_ptr> errors(cfg.chains);
  int next = 0;
  while (next < cfg.chains) {
    int batch = std::min(cfg.threads, cfg.chains - next);
    if (batch == 1) {
      try {
        d.chains[next] = run_chain(prototype, cfg, next);
      } catch (...) {
        errors[next] = std::current_exception();
      }
    } else {
      std::vector<std::thread> pool;
      for (int c = next; c < next + batch; ++c)
        pool.emplace_back([&, c] {
          try {
            d.chains[c] = run_chain(prototype, cfg, c);
          } catch (...) {
            errors[c] = std::current_exception();
          }
        });
      for (auto& t : pool) t.join();
    }
    next += batch;
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  d.provenance.seed = cfg.seed;
  d.provenance.chains = cfg.chains;
  d.provenance.threads = cfg.threads;
  d.provenance.iterations = cfg.iterations;
  d.provenance.burn_in = cfg.burn_in;
  d.provenance.thin = cfg.thin;
  d.provenance.model = probe->kind();
  d.provenance.version = library_version();
  return d;
}

std::size_t Draws::column(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("no trace named '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

bool Draws::has(const std::string& name) const { return std::find(names.begin(), names.end(), name) != names.end(); }

std::vector<double> Draws::trace(std::size_t chain, std::size_t col) const {
  std::vector<double> out;
  out.reserve(chains.at(chain).rows.size());
  for (const auto& r : chains[chain].rows) out.push_back(r.at(col));
  return out;
}

std::vector<std::vector<double>> Draws::traces(std::size_t col) const {
  std::vector<std::vector<double>> out;
  for (std::size_t c = 0; c < chains.size(); ++c) out.push_back(trace(c, col));
  return out;
}

std::vector<double> Draws::pooled(std::size_t col) const {
  std::vector<double> out;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    auto t = trace(c, col);
    out.insert(out.end(), t.begin(), t.end());
  }
  return out;
}

double Draws::mean(const std::string& name) const {
  auto v = pooled(name);
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

KernelStats Draws::kernel_stats(const std::string& kernel) const {
  auto it = std::find(kernel_names.begin(), kernel_names.end(), kernel);
  if (it == kernel_names.end()) throw std::out_of_range("no kernel named '" + kernel + "'");
  std::size_t i = static_cast<std::size_t>(it - kernel_names.begin());
  KernelStats s;
  for (const auto& c : chains) s += c.kernels.at(i);
  return s;
}

}  // namespace ptree
