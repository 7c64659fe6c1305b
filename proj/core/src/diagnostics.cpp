#include "ptree/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ptree {

namespace {

double mean_of(const std::vector<double>& x) {
  return x.empty() ? 0.0 : std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double var_of(const std::vector<double>& x, double m) {
  if (x.size() < 2) return 0.0;
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

// Autocovariance at lag t, normalised by n.
double autocov(const std::vector<double>& x, double m, std::size_t t) {
  double s = 0.0;
  for (std::size_t i = 0; i + t < x.size(); ++i) s += (x[i] - m) * (x[i + t] - m);
  return s / static_cast<double>(x.size());
}

}  // namespace

EssResult effective_sample_size(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 4) return {static_cast<double>(n), true};
  double m = mean_of(x);
  double g0 = autocov(x, m, 0);
  if (!(g0 > 1e-300 * (1.0 + m * m))) return {0.0, true};
  // Geyer: sum pairs Gamma_k = rho_2k + rho_2k+1 while positive, forced monotone.
  double sum = 0.0, prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = (autocov(x, m, 2 * k) + autocov(x, m, 2 * k + 1)) / g0;
    if (pair <= 0.0) break;
    pair = std::min(pair, prev);
    prev = pair;
    sum += pair;
  }
  double tau = -1.0 + 2.0 * sum;
  tau = std::max(tau, 1.0 / std::log10(static_cast<double>(n) + 10.0));
  return {static_cast<double>(n) / tau, false};
}

EssResult effective_sample_size(const std::vector<std::vector<double>>& chains) {
  EssResult out{0.0, true};
  for (const auto& c : chains) {
    auto e = effective_sample_size(c);
    out.value += e.value;
    out.degenerate = out.degenerate && e.degenerate;
  }
  return out;
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> halves;
  for (const auto& c : chains) {
    std::size_t h = c.size() / 2;
    if (h < 2) continue;
    halves.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(h));
    halves.emplace_back(c.end() - static_cast<std::ptrdiff_t>(h), c.end());
  }
  if (halves.size() < 2) return 1.0;
  const double n = static_cast<double>(halves[0].size());
  const double m = static_cast<double>(halves.size());
  std::vector<double> means;
  double w = 0.0;
  for (const auto& h : halves) {
    double mu = mean_of(h);
    means.push_back(mu);
    w += var_of(h, mu);
  }
  w /= m;
  double b = n * var_of(means, mean_of(means));
  if (w <= 0.0) return b <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  double vhat = (n - 1.0) / n * w + b / n;
  return std::sqrt(vhat / w);
}

double quantile_sorted(const std::vector<double>& s, double q) {
  if (s.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (q <= 0.0) return s.front();
  if (q >= 1.0) return s.back();
  double h = (static_cast<double>(s.size()) - 1.0) * q;
  std::size_t lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

double quantile(std::vector<double> x, double q) {
  std::sort(x.begin(), x.end());
  return quantile_sorted(x, q);
}

const ParamSummary& Diagnostics::param(const std::string& name) const {
  for (const auto& p : params)
    if (p.name == name) return p;
  throw std::out_of_range("no summary for '" + name + "'");
}

const CurveBand& Diagnostics::curve(const std::string& prefix) const {
  for (const auto& c : curves)
    if (c.prefix == prefix) return c;
  throw std::out_of_range("no curve '" + prefix + "'");
}

Diagnostics diagnose(const Draws& draws) {
  Diagnostics d;
  for (std::size_t col = 0; col < draws.names.size(); ++col) {
    auto chains = draws.traces(col);
    auto pooled = draws.pooled(col);
    ParamSummary s;
    s.name = draws.names[col];
    if (!pooled.empty()) {
      s.mean = mean_of(pooled);
      s.sd = std::sqrt(var_of(pooled, s.mean));
      std::sort(pooled.begin(), pooled.end());
      s.q025 = quantile_sorted(pooled, 0.025);
      s.q50 = quantile_sorted(pooled, 0.5);
      s.q975 = quantile_sorted(pooled, 0.975);
    }
    auto e = effective_sample_size(chains);
    s.ess = e.value;
    s.degenerate = e.degenerate;
    s.rhat = s.degenerate ? 1.0 : split_rhat(chains);
    d.params.push_back(s);
  }
  for (const auto& axis : draws.axes) {
    CurveBand band;
    band.prefix = axis.prefix;
    band.x = axis.x;
    for (std::size_t i = 0; i < axis.x.size(); ++i) {
      const auto& s = d.param(axis.prefix + "[" + std::to_string(i + 1) + "]");
      band.mean.push_back(s.mean);
      band.lower.push_back(s.q025);
      band.upper.push_back(s.q975);
    }
    d.curves.push_back(band);
  }
  for (std::size_t k = 0; k < draws.kernel_names.size(); ++k) {
    KernelSummary ks;
    ks.name = draws.kernel_names[k];
    ks.metropolis = draws.kernel_is_mh[k];
    auto st = draws.kernel_stats(ks.name);
    ks.proposals = st.proposals;
    ks.accepted = st.accepted;
    ks.rate = st.rate();
    d.kernels.push_back(ks);
  }
  return d;
}

}  // namespace ptree
