#include "ptree/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ptree/hlpt.hpp"
#include "ptree/replicate.hpp"
#include "ptree/special.hpp"

namespace ptree {

namespace {

double law_cdf(const BivariateLaw& law, bool entry, double x) {
  double loc = entry ? law.entry_loc : law.exit_loc;
  double scale = entry ? law.entry_scale : law.exit_scale;
  switch (law.kind) {
    case BivariateLaw::Kind::Laplace: return laplace_cdf(x, loc, scale);
    case BivariateLaw::Kind::Normal: return normal_cdf((x - loc) / scale);
    case BivariateLaw::Kind::Uniform: break;
  }
  throw std::logic_error("uniform law has no CDF here");
}

std::vector<double> axis_masses(const AxisGrid& axis, const BivariateLaw& law, bool entry) {
  std::vector<double> out(axis.units());
  for (int u = 0; u < axis.units(); ++u) {
    Bound lo = axis.lower(u), hi = axis.upper(u);
    if (law.kind == BivariateLaw::Kind::Uniform) {
      if (!lo.finite() || !hi.finite()) throw std::invalid_argument("uniform law needs a finite axis");
      out[u] = hi.value - lo.value;
      continue;
    }
    double a = lo.finite() ? law_cdf(law, entry, lo.value) : 0.0;
    double b = hi.finite() ? law_cdf(law, entry, hi.value) : 1.0;
    out[u] = std::max(0.0, b - a);
  }
  return out;
}

std::int64_t matrix_total(const Matrix64& m) {
  std::int64_t t = 0;
  for (const auto& r : m)
    for (auto v : r) t += v;
  return t;
}

}  // namespace

CellMatrix cell_probabilities(const AxisGrid& axis, const BivariateLaw& law, bool available_only) {
  if (law.kind != BivariateLaw::Kind::Uniform && !(law.entry_scale > 0.0 && law.exit_scale > 0.0))
    throw std::invalid_argument("law scales must be positive");
  auto pe = axis_masses(axis, law, true);
  auto px = axis_masses(axis, law, false);
  const int n = axis.units();
  CellMatrix c(n, std::vector<double>(n, 0.0));
  double total = 0.0;
  for (int f = 0; f < n; ++f)
    for (int l = f; l < n; ++l) {
      if (l == f && available_only) continue;
      c[f][l] = pe[f] * px[l] * (l == f ? 0.5 : 1.0);
      total += c[f][l];
    }
  if (!(total > 0.0)) throw std::invalid_argument("law puts no mass on the feasible cells");
  for (auto& r : c)
    for (auto& v : r) v /= total;
  return c;
}

std::vector<double> entry_cdf(const CellMatrix& cells) {
  const int K = static_cast<int>(cells.size()) - 1;
  std::vector<double> out(K, 0.0);
  for (int j = 1; j <= K; ++j)
    for (int f = 0; f < j; ++f)
      for (double v : cells[f]) out[j - 1] += v;
  return out;
}

std::vector<double> exit_cdf(const CellMatrix& cells) {
  const int K = static_cast<int>(cells.size()) - 1;
  std::vector<double> out(K, 0.0);
  for (int j = 1; j <= K; ++j)
    for (const auto& row : cells)
      for (int l = 0; l < j; ++l) out[j - 1] += row[l];
  return out;
}

CaptureHistoryMatrix simulate_cjs_histories(const CjsCounts& n, double p, Rng& rng) {
  CaptureHistoryMatrix h;
  h.K = n.K;
  for (int k = 1; k <= n.K; ++k)
    for (int j = 1; j <= n.length(k); ++j)
      for (std::int64_t i = 0; i < n.at(k, j); ++i) {
        std::vector<std::uint8_t> row(n.K, 0);
        row[k - 1] = 1;
        for (int o = k + 1; o <= k + j - 1; ++o) row[o - 1] = rng.uniform() < p;
        h.rows.push_back(std::move(row));
      }
  return h;
}

CaptureHistoryMatrix simulate_open_histories(const OpenCounts& n, double p, Rng& rng) {
  CaptureHistoryMatrix h;
  h.K = n.K;
  for (int k = 1; k <= n.K; ++k)
    for (int f = 0; f <= n.K; ++f)
      for (int l = 0; l <= n.K; ++l)
        for (std::int64_t i = 0; i < n.slice[k][f][l]; ++i) {
          std::vector<std::uint8_t> row(n.K, 0);
          row[k - 1] = 1;
          for (int o = k + 1; o <= l; ++o) row[o - 1] = rng.uniform() < p;
          h.rows.push_back(std::move(row));
        }
  return h;
}

std::pair<OpenCounts, CaptureHistoryMatrix> simulate_open_population(const Matrix64& cells, double p, Rng& rng) {
  const int K = static_cast<int>(cells.size()) - 1;
  OpenCounts n = OpenCounts::zeros(K);
  CaptureHistoryMatrix h;
  h.K = K;
  for (int f = 0; f <= K; ++f)
    for (int l = f; l <= K; ++l)
      for (std::int64_t i = 0; i < cells[f][l]; ++i) {
        std::vector<std::uint8_t> row(K, 0);
        int first = 0;
        for (int o = f + 1; o <= l; ++o) {
          row[o - 1] = rng.uniform() < p;
          if (row[o - 1] && !first) first = o;
        }
        ++n.slice[first][f][l];
        if (first) h.rows.push_back(std::move(row));
      }
  return {std::move(n), std::move(h)};
}

std::vector<std::int64_t> present_by_occasion(const Matrix64& cells) {
  const int K = static_cast<int>(cells.size()) - 1;
  std::vector<std::int64_t> out(K + 1, 0);
  for (int f = 0; f <= K; ++f)
    for (int l = f; l <= K; ++l)
      for (int j = f + 1; j <= l; ++j) out[j] += cells[f][l];
  return out;
}

std::vector<std::int64_t> present_by_unit(const Matrix64& cells) {
  const int T = static_cast<int>(cells.size());
  std::vector<std::int64_t> out(T, 0);
  for (int e = 0; e < T; ++e)
    for (int x = e; x < T; ++x)
      for (int d = e; d <= x; ++d) out[d] += cells[e][x];
  return out;
}

std::vector<std::int64_t> simulate_counts(const std::vector<std::int64_t>& present, double p, Rng& rng) {
  std::vector<std::int64_t> out(present.size());
  for (std::size_t i = 0; i < present.size(); ++i) out[i] = rng.binomial(present[i], p);
  return out;
}

Matrix64 simulate_recoveries(const std::vector<Matrix64>& counts, double lambda, int first_row, int last_row,
                             Rng& rng) {
  const int K = static_cast<int>(counts.size());
  Matrix64 R(K, std::vector<std::int64_t>(K, 0));
  for (int k = 0; k < K; ++k) {
    const int U = static_cast<int>(counts[k].size()) - 1;
    for (int j = 0; j <= std::min(U, K - 1 - k); ++j)
      R[k][k + j] = rng.binomial(rr_pool(counts[k], j, first_row, std::min(last_row, U)), lambda);
  }
  return R;
}

CellMatrix rr_cell_probabilities(const std::vector<double>& phi, int U) {
  if (static_cast<int>(phi.size()) != 2 * U) throw std::invalid_argument("need one survival value per age 0..2U-1");
  CellMatrix c(U + 1, std::vector<double>(U + 1, 0.0));
  double alive = 1.0;
  for (int L = 0; L <= 2 * U; ++L) {
    double pl = L < 2 * U ? alive * (1.0 - phi[L]) : alive;
    if (L < 2 * U) alive *= phi[L];
    int lo = std::max(0, L - U), hi = std::min(U, L);
    for (int uf = lo; uf <= hi; ++uf) c[uf][L - uf] = pl / (hi - lo + 1);
  }
  return c;
}

Matrix64 draw_cells(std::int64_t n, const CellMatrix& probs, Rng& rng) {
  std::vector<double> flat;
  for (const auto& r : probs) flat.insert(flat.end(), r.begin(), r.end());
  auto draw = rng.multinomial(n, flat);
  Matrix64 out(probs.size());
  std::size_t i = 0;
  for (std::size_t r = 0; r < probs.size(); ++r)
    for (std::size_t c = 0; c < probs[r].size(); ++c) out[r].push_back(draw[i++]);
  return out;
}

namespace {

std::string idx(const std::string& name, int i) { return name + "[" + std::to_string(i) + "]"; }

void put_cdfs(SimTruth& t, const CellMatrix& probs, const std::string& suffix) {
  auto ec = entry_cdf(probs), xc = exit_cdf(probs);
  for (std::size_t j = 0; j < ec.size(); ++j) {
    t.values[idx("entry_cdf" + suffix, static_cast<int>(j) + 1)] = ec[j];
    t.values[idx("exit_cdf" + suffix, static_cast<int>(j) + 1)] = xc[j];
  }
}

void check_prob(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(what) + " must be in [0, 1]");
}

SimResult sim_cjs(const ModelSpec& spec, const TruthParams& tr, Rng& rng) {
  const int K = spec.occasions();
  TieMap tie = cjs_tie_map(spec.grid(), spec.constraint);
  const int classes = tie.class_count();
  std::vector<double> phi = tr.phi;
  if (phi.size() == 1) phi.assign(classes, phi[0]);
  if (static_cast<int>(phi.size()) != classes)
    throw std::invalid_argument("CJS truth needs " + std::to_string(classes) + " survival values");
  if (static_cast<int>(tr.releases.size()) != K) throw std::invalid_argument("CJS truth needs K release counts");
  check_prob(tr.p, "p");
  SimResult out;
  CjsCounts n = CjsCounts::zeros(K);
  for (int k = 1; k <= K; ++k) {
    const PartitionTree& t = tie.tree(k - 1);
    std::vector<double> probs(n.length(k), 0.0);
    double stay = 1.0;
    for (int id : t.internal_nodes()) {
      int s = t.node(id).step;
      double v = 1.0 - phi[tie.class_of({k - 1, id})];
      check_prob(v, "phi");
      probs[s] = stay * v;
      stay *= 1.0 - v;
    }
    probs.back() = stay;
    auto draw = rng.multinomial(tr.releases[k - 1], probs);
    for (int j = 1; j <= n.length(k); ++j) n.at(k, j) = draw[j - 1];
  }
  out.data.histories = simulate_cjs_histories(n, tr.p, rng);
  for (int c = 0; c < classes; ++c) out.truth.values[idx("phi", c + 1)] = phi[c];
  out.truth.values["p"] = tr.p;
  return out;
}

SimResult sim_joint(const ModelSpec& spec, const TruthParams& tr, Rng& rng) {
  auto probs = cell_probabilities(spec.grid().axis(), tr.law, true);
  SimResult out;
  if (!spec.resight) {
    check_prob(tr.p_capture, "p_capture");
    check_prob(tr.p_count, "p_count");
    Matrix64 cells = draw_cells(tr.N, probs, rng);
    auto [slices, hist] = simulate_open_population(cells, tr.p_capture, rng);
    out.data.histories = std::move(hist);
    auto c = simulate_counts(present_by_occasion(cells), tr.p_count, rng);
    out.data.counts = {std::vector<std::int64_t>(c.begin() + 1, c.end())};
    out.truth.values["N"] = static_cast<double>(tr.N);
    out.truth.values["p_C"] = tr.p_capture;
    out.truth.values["p_D"] = tr.p_count;
    put_cdfs(out.truth, probs, "");
    return out;
  }
  check_prob(tr.p_r, "p_r");
  check_prob(tr.p_c, "p_c");
  const int K = spec.occasions();
  Matrix64 marked = draw_cells(tr.N_marked, probs, rng);
  for (int f = 0; f <= K; ++f)
    for (int l = f + 1; l <= K; ++l)
      for (std::int64_t i = 0; i < marked[f][l]; ++i) {
        std::vector<std::uint8_t> h1(K, 0), h2(K, 0);
        bool seen = false;
        for (int o = f + 1; o <= l; ++o) {
          h1[o - 1] = rng.uniform() < tr.p_r;
          h2[o - 1] = rng.uniform() < tr.p_c;
          seen = seen || h1[o - 1] || h2[o - 1];
        }
        if (!seen) continue;
        out.data.resight_1.push_back(std::move(h1));
        out.data.resight_2.push_back(std::move(h2));
      }
  Matrix64 unmarked = draw_cells(tr.N_unmarked, probs, rng);
  auto c = simulate_counts(present_by_occasion(unmarked), tr.p_r, rng);
  out.data.counts = {std::vector<std::int64_t>(c.begin() + 1, c.end())};
  out.truth.values["N_M"] = static_cast<double>(tr.N_marked);
  out.truth.values["N_U"] = static_cast<double>(tr.N_unmarked);
  out.truth.values["p_R"] = tr.p_r;
  out.truth.values["p_C"] = tr.p_c;
  put_cdfs(out.truth, probs, "");
  return out;
}

SimResult sim_rr(const ModelSpec& spec, const TruthParams& tr, Rng& rng) {
  const int K = spec.occasions(), U = spec.U;
  if (static_cast<int>(tr.marked.size()) != K) throw std::invalid_argument("RR truth needs one marking total per year");
  check_prob(tr.lambda, "lambda");
  for (double v : tr.phi) check_prob(v, "phi");
  auto probs = rr_cell_probabilities(tr.phi, U);
  std::vector<Matrix64> counts;
  for (int k = 0; k < K; ++k) counts.push_back(draw_cells(tr.marked[k], probs, rng));
  SimResult out;
  if (spec.juvenile_split) {
    out.data.recoveries_juvenile = simulate_recoveries(counts, tr.lambda, 0, 0, rng);
    out.data.recoveries_adult = simulate_recoveries(counts, tr.lambda, 1, U, rng);
    for (int k = 0; k < K; ++k) {
      std::int64_t juv = 0;
      for (auto v : counts[k][0]) juv += v;
      out.data.marked_juvenile.push_back(juv);
      out.data.marked_adult.push_back(matrix_total(counts[k]) - juv);
    }
  } else {
    out.data.recoveries = simulate_recoveries(counts, tr.lambda, 0, U, rng);
    out.data.marked = tr.marked;
  }
  double alive = 1.0;
  for (int a = 0; a < 2 * U; ++a) {
    out.truth.values[idx("phi", a)] = tr.phi[a];
    alive *= tr.phi[a];
    out.truth.values[idx("survival", a + 1)] = alive;
  }
  out.truth.values["lambda"] = tr.lambda;
  return out;
}

SimResult sim_hier(const ModelSpec& spec, const TruthParams& tr, Rng& rng) {
  const std::size_t S = tr.laws.size();
  if (S == 0 || tr.omegas.size() != S || tr.ps.size() != S)
    throw std::invalid_argument("hierarchical truth needs a law, intensity and detection per dataset");
  SimResult out;
  for (std::size_t s = 0; s < S; ++s) {
    check_prob(tr.ps[s], "p");
    auto probs = cell_probabilities(spec.grid().axis(), tr.laws[s], true);
    std::int64_t N = rng.poisson(tr.omegas[s]);
    Matrix64 cells = draw_cells(N, probs, rng);
    auto c = simulate_counts(present_by_occasion(cells), tr.ps[s], rng);
    out.data.counts.emplace_back(c.begin() + 1, c.end());
    std::string tag = "_s" + std::to_string(s + 1);
    out.truth.values[idx("N", static_cast<int>(s) + 1)] = static_cast<double>(N);
    out.truth.values[idx("p", static_cast<int>(s) + 1)] = tr.ps[s];
    put_cdfs(out.truth, probs, tag);
  }
  return out;
}

SimResult sim_long(const ModelSpec& spec, const TruthParams& tr, Rng& rng) {
  spec.nested.validate();
  const int seasons = spec.nested.zero_periods;
  const int T = spec.nested.units_per_season();
  if (static_cast<int>(tr.laws.size()) != seasons) throw std::invalid_argument("long-series truth needs one law per season");
  check_prob(tr.p, "p");
  std::vector<Bound> edges;
  for (int i = 0; i <= T; ++i) edges.push_back(Bound::at(i));
  AxisGrid axis(edges);
  SimResult out;
  for (int i = 0; i < seasons; ++i) {
    auto probs = cell_probabilities(axis, tr.laws[i], false);
    std::int64_t N = rng.poisson(tr.omega);
    Matrix64 cells = draw_cells(N, probs, rng);
    out.data.counts.push_back(simulate_counts(present_by_unit(cells), tr.p, rng));
    out.truth.values[idx("N", i + 1)] = static_cast<double>(N);
  }
  out.truth.values["p"] = tr.p;
  out.truth.values["omega"] = tr.omega;
  return out;
}

}  // namespace

SimResult simulate(const ModelSpec& spec, const TruthParams& truth, Rng& rng) {
  spec.validate();
  SimResult r;
  switch (spec.kind) {
    case ModelKind::CJS: r = sim_cjs(spec, truth, rng); break;
    case ModelKind::JointCRCD: r = sim_joint(spec, truth, rng); break;
    case ModelKind::RR: r = sim_rr(spec, truth, rng); break;
    case ModelKind::HierCounts: r = sim_hier(spec, truth, rng); break;
    case ModelKind::LongSeriesOPT: r = sim_long(spec, truth, rng); break;
  }
  validate_data(spec, r.data);
  return r;
}

}  // namespace ptree
