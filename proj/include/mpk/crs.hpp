#pragma once

#include <algorithm>
#include <complex>
#include <cstdint>
#include <utility>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpk {

using index_t = std::int32_t;

/// Compressed-row sparse matrix with real double values.
///
/// Canonical form: within each row the column indices are strictly
/// increasing. All generators and the Matrix Market reader produce
/// canonical matrices; per-row summation order in spmv() follows the
/// stored order, which makes results reproducible bit-for-bit across
/// algorithms and rank counts.
///
/// Indices are 32-bit; matrices with more than 2^31-1 nonzeros are
/// rejected (the byte model assumes 4-byte indices).
struct CrsMatrix {
  index_t n_rows = 0;
  index_t n_cols = 0;
  std::vector<index_t> row_ptr;  // length n_rows+1
  std::vector<index_t> col_idx;  // length nnz
  std::vector<double> values;    // length nnz

  index_t nnz() const { return row_ptr.empty() ? 0 : row_ptr.back(); }
};

struct MatrixStats {
  std::int64_t n_rows = 0;
  std::int64_t n_nz = 0;
  double nnzr = 0.0;            // n_nz / n_rows
  std::int64_t crs_bytes = 0;   // 4*n_rows + 12*n_nz
  double crs_mib = 0.0;
};

/// Checks the CrsMatrix invariants; throws std::invalid_argument on the
/// first violation. `require_sorted` additionally enforces canonical
/// (strictly ascending) column order per row.
inline void validate(const CrsMatrix& a, bool require_sorted = true) {
  if (a.n_rows < 0 || a.n_cols < 0)
    throw std::invalid_argument("crs: negative dimension");
  if (a.row_ptr.size() != static_cast<std::size_t>(a.n_rows) + 1)
    throw std::invalid_argument("crs: row_ptr length != n_rows+1");
  if (a.row_ptr.front() != 0)
    throw std::invalid_argument("crs: row_ptr[0] != 0");
  for (index_t i = 0; i < a.n_rows; ++i)
    if (a.row_ptr[i + 1] < a.row_ptr[i])
      throw std::invalid_argument("crs: row_ptr not nondecreasing at row " +
                                  std::to_string(i));
  const auto nnz = static_cast<std::size_t>(a.row_ptr.back());
  if (a.col_idx.size() != nnz || a.values.size() != nnz)
    throw std::invalid_argument("crs: col_idx/values length != row_ptr back");
  for (index_t i = 0; i < a.n_rows; ++i) {
    for (index_t j = a.row_ptr[i]; j < a.row_ptr[i + 1]; ++j) {
      if (a.col_idx[j] < 0 || a.col_idx[j] >= a.n_cols)
        throw std::invalid_argument("crs: column out of range in row " +
                                    std::to_string(i));
      if (require_sorted && j > a.row_ptr[i] && a.col_idx[j] <= a.col_idx[j - 1])
        throw std::invalid_argument("crs: columns not strictly ascending in row " +
                                    std::to_string(i));
    }
  }
}

/// y <- A x. Per-row accumulation proceeds in stored column order; this
/// ordering is part of the contract. The vector scalar may be real or
/// complex double.
template <class T>
void spmv(const CrsMatrix& a, std::span<const T> x, std::span<T> y) {
  if (x.size() < static_cast<std::size_t>(a.n_cols))
    throw std::invalid_argument("spmv: x shorter than n_cols");
  if (y.size() < static_cast<std::size_t>(a.n_rows))
    throw std::invalid_argument("spmv: y shorter than n_rows");
  for (index_t i = 0; i < a.n_rows; ++i) {
    T sum{};
    for (index_t j = a.row_ptr[i]; j < a.row_ptr[i + 1]; ++j)
      sum += a.values[j] * x[a.col_idx[j]];
    y[i] = sum;
  }
}

template <class T>
std::vector<T> spmv(const CrsMatrix& a, const std::vector<T>& x) {
  std::vector<T> y(a.n_rows);
  spmv<T>(a, x, y);
  return y;
}

inline MatrixStats matrix_stats(const CrsMatrix& a) {
  MatrixStats s;
  s.n_rows = a.n_rows;
  s.n_nz = a.nnz();
  s.nnzr = a.n_rows > 0 ? static_cast<double>(s.n_nz) / s.n_rows : 0.0;
  s.crs_bytes = 4 * s.n_rows + 12 * s.n_nz;
  s.crs_mib = static_cast<double>(s.crs_bytes) / (1024.0 * 1024.0);
  return s;
}

/// Builds a CrsMatrix from (row, col, value) triplets. Duplicates are
/// summed; rows come out in canonical ascending-column order.
inline CrsMatrix crs_from_triplets(index_t n_rows, index_t n_cols,
                                   std::vector<index_t> rows,
                                   std::vector<index_t> cols,
                                   std::vector<double> vals) {
  const std::size_t nt = rows.size();
  if (cols.size() != nt || vals.size() != nt)
    throw std::invalid_argument("triplets: array length mismatch");
  std::vector<index_t> count(n_rows + 1, 0);
  for (std::size_t k = 0; k < nt; ++k) {
    if (rows[k] < 0 || rows[k] >= n_rows || cols[k] < 0 || cols[k] >= n_cols)
      throw std::invalid_argument("triplets: index out of range");
    ++count[rows[k] + 1];
  }
  for (index_t i = 0; i < n_rows; ++i) count[i + 1] += count[i];
  std::vector<index_t> tcol(nt);
  std::vector<double> tval(nt);
  {
    std::vector<index_t> cursor(count.begin(), count.end() - 1);
    for (std::size_t k = 0; k < nt; ++k) {
      const index_t pos = cursor[rows[k]]++;
      tcol[pos] = cols[k];
      tval[pos] = vals[k];
    }
  }
  CrsMatrix a;
  a.n_rows = n_rows;
  a.n_cols = n_cols;
  a.row_ptr.assign(n_rows + 1, 0);
  a.col_idx.reserve(nt);
  a.values.reserve(nt);
  std::vector<std::pair<index_t, double>> row;
  for (index_t i = 0; i < n_rows; ++i) {
    row.clear();
    for (index_t j = count[i]; j < count[i + 1]; ++j)
      row.emplace_back(tcol[j], tval[j]);
    std::sort(row.begin(), row.end(),
              [](const auto& l, const auto& r) { return l.first < r.first; });
    // merge duplicates
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (!a.col_idx.empty() &&
          static_cast<index_t>(a.col_idx.size()) > a.row_ptr[i] &&
          a.col_idx.back() == row[k].first) {
        a.values.back() += row[k].second;
      } else {
        a.col_idx.push_back(row[k].first);
        a.values.push_back(row[k].second);
      }
    }
    a.row_ptr[i + 1] = static_cast<index_t>(a.col_idx.size());
  }
  if (a.col_idx.size() > static_cast<std::size_t>(std::numeric_limits<index_t>::max()))
    throw std::invalid_argument("crs: nonzero count exceeds 32-bit index range");
  return a;
}

}  // namespace mpk
