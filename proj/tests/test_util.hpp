#pragma once

// Shared test-only oracles: dense linear algebra kept deliberately
// independent of the CRS/MPK implementation paths they check.

#include <complex>
#include <random>
#include <vector>

#include "mpk/crs.hpp"

namespace testutil {

using mpk::CrsMatrix;
using mpk::index_t;

inline std::vector<std::vector<double>> to_dense(const CrsMatrix& a) {
  std::vector<std::vector<double>> d(a.n_rows,
                                     std::vector<double>(a.n_cols, 0.0));
  for (index_t i = 0; i < a.n_rows; ++i)
    for (index_t j = a.row_ptr[i]; j < a.row_ptr[i + 1]; ++j)
      d[i][a.col_idx[j]] += a.values[j];
  return d;
}

template <class T>
std::vector<T> dense_matvec(const std::vector<std::vector<double>>& d,
                            const std::vector<T>& x) {
  std::vector<T> y(d.size(), T{});
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d[i].size(); ++j) y[i] += d[i][j] * x[j];
  return y;
}

/// A^p x by repeated dense mat-vec.
template <class T>
std::vector<T> dense_power(const CrsMatrix& a, const std::vector<T>& x,
                           int p) {
  auto d = to_dense(a);
  std::vector<T> v = x;
  for (int k = 0; k < p; ++k) v = dense_matvec(d, v);
  return v;
}

/// Random sparse matrix with symmetric pattern and small integer values
/// (exactly representable sums at the sizes used in tests).
inline CrsMatrix random_symmetric_pattern(index_t n, double density,
                                          std::uint64_t seed,
                                          int max_abs_value = 2) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> val(-max_abs_value, max_abs_value);
  std::vector<index_t> rows, cols;
  std::vector<double> vals;
  for (index_t i = 0; i < n; ++i) {
    // diagonal keeps the graph anchored
    rows.push_back(i);
    cols.push_back(i);
    vals.push_back(val(rng));
    for (index_t j = i + 1; j < n; ++j)
      if (u(rng) < density) {
        const double v = val(rng), w = val(rng);
        rows.push_back(i);
        cols.push_back(j);
        vals.push_back(v);
        rows.push_back(j);
        cols.push_back(i);
        vals.push_back(w);
      }
  }
  return mpk::crs_from_triplets(n, n, std::move(rows), std::move(cols),
                                std::move(vals));
}

inline std::vector<double> random_int_vector(index_t n, std::uint64_t seed,
                                             int max_abs = 4) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> val(-max_abs, max_abs);
  std::vector<double> x(n);
  for (auto& v : x) v = val(rng);
  return x;
}

inline std::vector<double> random_real_vector(index_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

}  // namespace testutil
