#pragma once

#include <cstdint>
#include <vector>

namespace ptree {

using Matrix64 = std::vector<std::vector<std::int64_t>>;

struct CaptureHistoryMatrix {
  int K = 0;
  std::vector<std::vector<std::uint8_t>> rows;
  int individuals() const { return static_cast<int>(rows.size()); }
  void validate() const;  // binary cells, K columns, at least one capture per row
};

// Occasions are 1-based; index 0 of every vector is unused.
struct FirstLastSummary {
  int K = 0;
  Matrix64 z;                                  // z[i][j]: first capture i, last capture j
  std::vector<std::int64_t> c;                 // captures per occasion
  std::vector<std::int64_t> f;                 // first captures per occasion
  std::vector<std::int64_t> captures_by_first; // all captures of individuals first caught at k
  std::int64_t individuals() const;
};

FirstLastSummary summarize_histories(const CaptureHistoryMatrix& h);

// CJS latent counts: slice[k-1][j-1] = n^k_j, individuals first caught at k staying j occasions.
struct CjsCounts {
  int K = 0;
  Matrix64 slice;
  static CjsCounts zeros(int K);
  std::int64_t& at(int k, int j) { return slice[k - 1][j - 1]; }
  std::int64_t at(int k, int j) const { return slice[k - 1][j - 1]; }
  int length(int k) const { return K - k + 1; }
};

// Occasions after first capture at which slice-k individuals are present.
std::int64_t cjs_available(const CjsCounts& n, int k);
double cjs_slice_loglik(const FirstLastSummary& s, const CjsCounts& n, int k, double p);
double cjs_loglik(const FirstLastSummary& s, const CjsCounts& n, double p);

// Open-population counts: slice[k] is a (K+1) x (K+1) matrix over (entry interval f, exit interval l).
// Slice 0 holds never-captured individuals; slice k >= 1 has f < k <= l.
struct OpenCounts {
  int K = 0;
  std::vector<Matrix64> slice;
  static OpenCounts zeros(int K);
  std::int64_t total(int k) const;
  std::int64_t grand_total() const;
  Matrix64 combined() const;  // sum over slices
};

// Individuals present at occasion j (f < j <= l), summed over all slices.
std::int64_t opencr_present(const OpenCounts& n, int j);
// Occasions at which slice-k individuals are present (all of them, including the first capture).
std::int64_t opencr_available(const OpenCounts& n, int k);
double opencr_slice_loglik(const FirstLastSummary& s, const OpenCounts& n, int k, double p);
// Includes the never-captured slice: (1 - p)^(occasions present).
double opencr_loglik(const FirstLastSummary& s, const OpenCounts& n, double p);

double count_loglik(std::int64_t c, std::int64_t n_available, double p);

// Ring recovery. R is K x K (0-based [k][k + j]); counts[k] is (U+1) x (U+1) over (u_f, u_l).
double rr_loglik(const Matrix64& R, const std::vector<Matrix64>& counts, double lambda);
// Juvenile rows (u_f = 0) and adult rows (u_f >= 1) with separate recovery matrices.
double rr_loglik_split(const Matrix64& R_juvenile, const Matrix64& R_adult, const std::vector<Matrix64>& counts,
                       double lambda);
// Recovery pool for marking year k and recovery delay j.
std::int64_t rr_pool(const Matrix64& slice, int j, int first_row, int last_row);

enum class Protocol { Cjs, OpenCr };
// Brute-force check of the assignment formulas (small D and K only).
double enumeration_oracle_cjs(const CaptureHistoryMatrix& h, const CjsCounts& n, double p);
double enumeration_oracle_opencr(const CaptureHistoryMatrix& h, const OpenCounts& n, double p);

// Forward recursion for P(history | first capture) in the CJS model.
// v[k-1][j-1] = V^k_j, the probability of leaving after j occasions given staying at least j.
double cjs_history_probability(const std::vector<std::uint8_t>& history, const std::vector<std::vector<double>>& v,
                               double p);

}  // namespace ptree
