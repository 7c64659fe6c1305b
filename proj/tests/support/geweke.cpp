#include "geweke.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ptree::testing {

namespace {

double mean_of(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double var_of(const std::vector<double>& x) {
  double m = mean_of(x), s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

}  // namespace

double batch_means_se(const std::vector<double>& x, int batches) {
  const std::size_t len = x.size() / static_cast<std::size_t>(batches);
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) s += x[b * len + i];
    means.push_back(s / static_cast<double>(len));
  }
  return std::sqrt(var_of(means) / batches);
}

GewekeResult geweke(const Model& prototype, const GewekeOptions& opt) {
  const auto names = prototype.trace_names();
  const std::size_t P = names.size();
  std::vector<std::vector<double>> fwd(P), chain(P);

  {
    auto m = prototype.clone();
    Rng rng(split_seed(opt.seed, 0));
    std::vector<double> row;
    for (int i = 0; i < opt.forward_draws; ++i) {
      m->draw_prior(rng);
      m->regenerate_data(rng);
      row.clear();
      m->trace(row);
      for (std::size_t j = 0; j < P; ++j) fwd[j].push_back(row[j]);
    }
  }

  GewekeResult res;
  {
    auto m = prototype.clone();
    Rng rng(split_seed(opt.seed, 1));
    m->draw_prior(rng);
    m->regenerate_data(rng);
    auto kernels = m->kernels();
    for (const auto& k : kernels) res.kernels.push_back(k.name);
    std::vector<double> row;
    for (int i = 0; i < opt.burn_in + opt.chain_sweeps; ++i) {
      // Adaptation stays off: the chain must be time-homogeneous for the comparison.
      sweep(kernels, rng, false, nullptr, i);
      m->regenerate_data(rng);
      m->check_state();
      if (i < opt.burn_in) continue;
      row.clear();
      m->trace(row);
      for (std::size_t j = 0; j < P; ++j) chain[j].push_back(row[j]);
    }
  }

  auto compare = [&](const std::string& name, const std::vector<double>& a, const std::vector<double>& b) {
    double va = var_of(a) / static_cast<double>(a.size());
    double se_b = batch_means_se(b, opt.batches);
    double se = std::sqrt(va + se_b * se_b);
    GewekeStat s{name, mean_of(a), mean_of(b), 0.0};
    if (se > 0.0) s.z = (s.forward_mean - s.chain_mean) / se;
    else if (s.forward_mean != s.chain_mean) s.z = INFINITY;
    res.stats.push_back(s);
  };
  for (std::size_t j = 0; j < P; ++j) {
    compare(names[j], fwd[j], chain[j]);
    if (opt.squares) {
      auto sq = [](std::vector<double> v) {
        for (double& x : v) x *= x;
        return v;
      };
      compare(names[j] + "^2", sq(fwd[j]), sq(chain[j]));
    }
  }
  for (const auto& s : res.stats)
    if (std::abs(s.z) > res.max_abs_z) {
      res.max_abs_z = std::abs(s.z);
      res.worst = s.name;
    }
  return res;
}

std::string GewekeResult::report(int top) const {
  auto sorted = stats;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return std::abs(a.z) > std::abs(b.z); });
  std::ostringstream os;
  os << "max |z| " << max_abs_z << " over " << stats.size() << " moments;";
  for (int i = 0; i < top && i < static_cast<int>(sorted.size()); ++i)
    os << " " << sorted[i].name << " z=" << sorted[i].z << " (" << sorted[i].forward_mean << " vs "
       << sorted[i].chain_mean << ")";
  return os.str();
}

}  // namespace ptree::testing
