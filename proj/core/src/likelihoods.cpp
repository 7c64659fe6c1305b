#include "ptree/likelihoods.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "ptree/special.hpp"

namespace ptree {

void CaptureHistoryMatrix::validate() const {
  if (K < 2) throw std::invalid_argument("capture histories need K >= 2 occasions");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<int>(rows[i].size()) != K)
      throw std::invalid_argument("history " + std::to_string(i + 1) + " has the wrong length");
    bool any = false;
    for (auto v : rows[i]) {
      if (v > 1) throw std::invalid_argument("history " + std::to_string(i + 1) + " has a non-binary cell");
      any = any || v;
    }
    if (!any) throw std::invalid_argument("history " + std::to_string(i + 1) + " has no capture");
  }
}

std::int64_t FirstLastSummary::individuals() const {
  std::int64_t s = 0;
  for (int k = 1; k <= K; ++k) s += f[k];
  return s;
}

FirstLastSummary summarize_histories(const CaptureHistoryMatrix& h) {
  h.validate();
  FirstLastSummary s;
  s.K = h.K;
  s.z.assign(h.K + 1, std::vector<std::int64_t>(h.K + 1, 0));
  s.c.assign(h.K + 1, 0);
  s.f.assign(h.K + 1, 0);
  s.captures_by_first.assign(h.K + 1, 0);
  for (const auto& row : h.rows) {
    int first = 0, last = 0, caught = 0;
    for (int o = 1; o <= h.K; ++o) {
      if (!row[o - 1]) continue;
      if (!first) first = o;
      last = o;
      ++caught;
      ++s.c[o];
    }
    ++s.z[first][last];
    ++s.f[first];
    s.captures_by_first[first] += caught;
  }
  return s;
}

CjsCounts CjsCounts::zeros(int K) {
  CjsCounts n;
  n.K = K;
  n.slice.resize(K);
  for (int k = 1; k <= K; ++k) n.slice[k - 1].assign(K - k + 1, 0);
  return n;
}

std::int64_t cjs_available(const CjsCounts& n, int k) {
  std::int64_t a = 0;
  for (int j = 1; j <= n.length(k); ++j) a += n.at(k, j) * (j - 1);
  return a;
}

namespace {
double pterm(std::int64_t captured, std::int64_t available, double p) {
  if (captured > available || captured < 0) return kNegInf;
  double out = 0.0;
  if (captured > 0) out += (p <= 0.0 ? kNegInf : static_cast<double>(captured) * std::log(p));
  if (available - captured > 0) out += (p >= 1.0 ? kNegInf : static_cast<double>(available - captured) * std::log1p(-p));
  return out;
}
}  // namespace

double cjs_slice_loglik(const FirstLastSummary& s, const CjsCounts& n, int k, double p) {
  const int K = s.K;
  std::int64_t total = 0;
  for (int j = 1; j <= n.length(k); ++j) {
    if (n.at(k, j) < 0) return kNegInf;
    total += n.at(k, j);
  }
  if (total != s.f[k]) return kNegInf;
  double out = 0.0;
  std::int64_t carry = 0;
  // Individuals last caught at L need a stay of at least L - k + 1 occasions.
  for (int L = K; L >= k; --L) {
    std::int64_t pool = n.at(k, L - k + 1) + carry;
    std::int64_t z = s.z[k][L];
    if (z > pool) return kNegInf;
    out += log_binom(pool, z);
    carry = pool - z;
  }
  return out + pterm(s.captures_by_first[k] - s.f[k], cjs_available(n, k), p);
}

double cjs_loglik(const FirstLastSummary& s, const CjsCounts& n, double p) {
  if (n.K != s.K) throw std::invalid_argument("count and summary occasions differ");
  double out = 0.0;
  for (int k = 1; k <= s.K; ++k) {
    out += cjs_slice_loglik(s, n, k, p);
    if (out == kNegInf) return out;
  }
  return out;
}

OpenCounts OpenCounts::zeros(int K) {
  OpenCounts n;
  n.K = K;
  n.slice.assign(K + 1, Matrix64(K + 1, std::vector<std::int64_t>(K + 1, 0)));
  return n;
}

std::int64_t OpenCounts::total(int k) const {
  std::int64_t t = 0;
  for (const auto& row : slice[k])
    for (auto v : row) t += v;
  return t;
}

std::int64_t OpenCounts::grand_total() const {
  std::int64_t t = 0;
  for (int k = 0; k <= K; ++k) t += total(k);
  return t;
}

Matrix64 OpenCounts::combined() const {
  Matrix64 m(K + 1, std::vector<std::int64_t>(K + 1, 0));
  for (const auto& sl : slice)
    for (int f = 0; f <= K; ++f)
      for (int l = 0; l <= K; ++l) m[f][l] += sl[f][l];
  return m;
}

std::int64_t opencr_present(const OpenCounts& n, int j) {
  std::int64_t t = 0;
  for (const auto& sl : n.slice)
    for (int f = 0; f < j; ++f)
      for (int l = j; l <= n.K; ++l) t += sl[f][l];
  return t;
}

std::int64_t opencr_available(const OpenCounts& n, int k) {
  std::int64_t a = 0;
  for (int f = 0; f <= n.K; ++f)
    for (int l = f; l <= n.K; ++l) a += n.slice[k][f][l] * (l - f);
  return a;
}

double opencr_slice_loglik(const FirstLastSummary& s, const OpenCounts& n, int k, double p) {
  const int K = s.K;
  const auto& m = n.slice[k];
  std::int64_t total = 0;
  for (int f = 0; f <= K; ++f)
    for (int l = 0; l <= K; ++l) {
      std::int64_t v = m[f][l];
      if (v < 0) return kNegInf;
      if (v > 0 && !(f < k && l >= k)) return kNegInf;
      total += v;
    }
  if (total != s.f[k]) return kNegInf;
  double out = 0.0;
  std::int64_t carry = 0;
  for (int L = K; L >= k; --L) {
    std::int64_t column = 0;
    for (int f = 0; f < k; ++f) column += m[f][L];
    std::int64_t pool = column + carry;
    std::int64_t z = s.z[k][L];
    if (z > pool) return kNegInf;
    out += log_binom(pool, z);
    carry = pool - z;
  }
  return out + pterm(s.captures_by_first[k], opencr_available(n, k), p);
}

double opencr_loglik(const FirstLastSummary& s, const OpenCounts& n, double p) {
  if (n.K != s.K) throw std::invalid_argument("count and summary occasions differ");
  for (int f = 0; f <= s.K; ++f)
    for (int l = 0; l <= s.K; ++l)
      if (n.slice[0][f][l] < 0 || (n.slice[0][f][l] > 0 && l < f)) return kNegInf;
  double out = pterm(0, opencr_available(n, 0), p);
  for (int k = 1; k <= s.K; ++k) {
    out += opencr_slice_loglik(s, n, k, p);
    if (out == kNegInf) return out;
  }
  return out;
}

double count_loglik(std::int64_t c, std::int64_t n_available, double p) { return binomial_logpmf(c, n_available, p); }

std::int64_t rr_pool(const Matrix64& slice, int j, int first_row, int last_row) {
  std::int64_t t = 0;
  for (int uf = first_row; uf <= last_row; ++uf) t += slice[uf][j];
  return t;
}

namespace {
double rr_rows(const Matrix64& R, const std::vector<Matrix64>& counts, double lambda, int first_row, int last_row) {
  const int K = static_cast<int>(R.size());
  if (static_cast<int>(counts.size()) != K) throw std::invalid_argument("one count matrix per marking year required");
  double out = 0.0;
  for (int k = 0; k < K; ++k) {
    const int U = static_cast<int>(counts[k].size()) - 1;
    for (int kk = 0; kk < K; ++kk) {
      std::int64_t r = R[k][kk];
      if (kk < k) {
        if (r != 0) return kNegInf;
        continue;
      }
      int j = kk - k;
      if (j > U) {
        if (r != 0) return kNegInf;
        continue;
      }
      std::int64_t pool = rr_pool(counts[k], j, first_row, std::min(last_row, U));
      double term = binomial_logpmf(r, pool, lambda);
      if (term == kNegInf) return kNegInf;
      out += term;
    }
  }
  return out;
}
}  // namespace

double rr_loglik(const Matrix64& R, const std::vector<Matrix64>& counts, double lambda) {
  int U = counts.empty() ? 0 : static_cast<int>(counts[0].size()) - 1;
  return rr_rows(R, counts, lambda, 0, U);
}

double rr_loglik_split(const Matrix64& R_juvenile, const Matrix64& R_adult, const std::vector<Matrix64>& counts,
                       double lambda) {
  int U = counts.empty() ? 0 : static_cast<int>(counts[0].size()) - 1;
  double a = rr_rows(R_juvenile, counts, lambda, 0, 0);
  if (a == kNegInf) return a;
  return a + rr_rows(R_adult, counts, lambda, 1, U);
}

namespace {

struct Individual {
  int first = 0;
  int last = 0;
  int caught = 0;
};

std::vector<std::vector<Individual>> by_first(const CaptureHistoryMatrix& h) {
  std::vector<std::vector<Individual>> out(h.K + 1);
  for (const auto& row : h.rows) {
    Individual ind;
    for (int o = 1; o <= h.K; ++o)
      if (row[o - 1]) {
        if (!ind.first) ind.first = o;
        ind.last = o;
        ++ind.caught;
      }
    out[ind.first].push_back(ind);
  }
  return out;
}

// Sums, over every assignment of labelled individuals to cells matching the target cell counts,
// the product of per-individual capture probabilities. Cells are given with per-cell weights.
double enumerate_assignments(const std::vector<Individual>& inds, const std::vector<std::int64_t>& target,
                             const std::function<double(const Individual&, int cell)>& logprob) {
  const int cells = static_cast<int>(target.size());
  std::vector<std::int64_t> used(cells, 0);
  double acc = kNegInf;
  std::function<void(std::size_t, double)> rec = [&](std::size_t i, double lp) {
    if (i == inds.size()) {
      for (int c = 0; c < cells; ++c)
        if (used[c] != target[c]) return;
      acc = log_add_exp(acc, lp);
      return;
    }
    for (int c = 0; c < cells; ++c) {
      if (used[c] >= target[c]) continue;
      double t = logprob(inds[i], c);
      if (t == kNegInf) continue;
      ++used[c];
      rec(i + 1, lp + t);
      --used[c];
    }
  };
  rec(0, 0.0);
  return acc;
}

// The closed forms count unlabelled placements into distinguishable slots; convert from labelled
// assignments by multiplying with prod(cell!) / prod(Z!).
double slot_correction(const std::vector<std::int64_t>& cells, const FirstLastSummary& s, int k) {
  double out = 0.0;
  for (auto n : cells) out += log_factorial(n);
  for (int L = k; L <= s.K; ++L) out -= log_factorial(s.z[k][L]);
  return out;
}

double log_p_terms(int captured, int available, double p) {
  if (captured > available) return kNegInf;
  double out = 0.0;
  if (captured) out += captured * std::log(p);
  if (available - captured) out += (available - captured) * std::log1p(-p);
  return out;
}

}  // namespace

double enumeration_oracle_cjs(const CaptureHistoryMatrix& h, const CjsCounts& n, double p) {
  auto groups = by_first(h);
  auto s = summarize_histories(h);
  double out = 0.0;
  for (int k = 1; k <= h.K; ++k) {
    std::vector<std::int64_t> target(n.slice[k - 1]);
    double lp = enumerate_assignments(groups[k], target, [&](const Individual& ind, int cell) {
      int stay = cell + 1;  // occasions k .. k + stay - 1
      if (ind.last > k + stay - 1) return kNegInf;
      return log_p_terms(ind.caught - 1, stay - 1, p);
    });
    if (lp == kNegInf) return kNegInf;
    out += lp + slot_correction(target, s, k);
  }
  return out;
}

double enumeration_oracle_opencr(const CaptureHistoryMatrix& h, const OpenCounts& n, double p) {
  auto groups = by_first(h);
  auto s = summarize_histories(h);
  const int K = h.K;
  double out = 0.0;
  // Never-captured individuals: each present occasion is a miss.
  for (int f = 0; f <= K; ++f)
    for (int l = f; l <= K; ++l) {
      auto c = n.slice[0][f][l];
      if (c < 0 || (c > 0 && l < f)) return kNegInf;
      if (c > 0) out += static_cast<double>(c) * log_p_terms(0, l - f, p);
    }
  for (int k = 1; k <= K; ++k) {
    std::vector<std::pair<int, int>> cells;
    std::vector<std::int64_t> target;
    for (int f = 0; f <= K; ++f)
      for (int l = 0; l <= K; ++l) {
        if (f < k && l >= k) {
          cells.emplace_back(f, l);
          target.push_back(n.slice[k][f][l]);
        } else if (n.slice[k][f][l] != 0) {
          return kNegInf;
        }
      }
    double lp = enumerate_assignments(groups[k], target, [&](const Individual& ind, int cell) {
      auto [f, l] = cells[cell];
      if (ind.last > l) return kNegInf;
      return log_p_terms(ind.caught, l - f, p);
    });
    if (lp == kNegInf) return kNegInf;
    out += lp + slot_correction(target, s, k);
  }
  return out;
}

double cjs_history_probability(const std::vector<std::uint8_t>& history, const std::vector<std::vector<double>>& v,
                               double p) {
  const int K = static_cast<int>(history.size());
  int k = 0;
  for (int o = 1; o <= K; ++o)
    if (history[o - 1]) {
      k = o;
      break;
    }
  if (!k) throw std::invalid_argument("history has no capture");
  double alive = 1.0, gone = 0.0;
  for (int o = k + 1; o <= K; ++o) {
    double stay = 1.0 - v.at(k - 1).at(o - k - 1);
    bool caught = history[o - 1];
    double next_alive = alive * stay * (caught ? p : 1.0 - p);
    double next_gone = caught ? 0.0 : alive * (1.0 - stay) + gone;
    alive = next_alive;
    gone = next_gone;
  }
  return alive + gone;
}

}  // namespace ptree
