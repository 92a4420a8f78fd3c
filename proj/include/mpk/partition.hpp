#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpk/crs.hpp"

namespace mpk {

enum class PartitionStrategy { BlockRows, BalancedNnz };

/// Row-wise assignment of a matrix to n logical ranks. Per-rank row
/// lists are kept in ascending global order; that order is the
/// pre-reordering local numbering.
struct Partition {
  int n_ranks = 1;
  std::vector<int> rank_of_row;
  std::vector<std::vector<index_t>> rows;      // per rank, ascending global
  std::vector<index_t> local_index_of_row;     // global -> position in owner list

  void finalize() {
    rows.assign(n_ranks, {});
    local_index_of_row.assign(rank_of_row.size(), 0);
    for (index_t g = 0; g < static_cast<index_t>(rank_of_row.size()); ++g) {
      auto& list = rows[rank_of_row[g]];
      local_index_of_row[g] = static_cast<index_t>(list.size());
      list.push_back(g);
    }
  }
};

inline Partition partition_rows(const CrsMatrix& a, int n,
                                PartitionStrategy strategy) {
  if (n < 1 || n > a.n_rows)
    throw std::invalid_argument("partition_rows: need 1 <= n <= n_rows");
  Partition p;
  p.n_ranks = n;
  p.rank_of_row.assign(a.n_rows, 0);
  if (strategy == PartitionStrategy::BlockRows) {
    const index_t base = a.n_rows / n, rem = a.n_rows % n;
    index_t g = 0;
    for (int r = 0; r < n; ++r) {
      const index_t cnt = base + (r < rem ? 1 : 0);
      for (index_t k = 0; k < cnt; ++k) p.rank_of_row[g++] = r;
    }
  } else {
    // contiguous blocks, greedy prefix split closest to equal nnz
    const double total = static_cast<double>(a.nnz());
    index_t g = 0;
    double prefix = 0.0;
    for (int r = 0; r < n; ++r) {
      const double target = total * (r + 1) / n;
      const index_t remaining_ranks = n - 1 - r;
      index_t end = g;
      double best = prefix;
      // rank must keep at least one row and leave one per remaining rank
      while (end < a.n_rows - remaining_ranks) {
        const double with_next =
            best + (a.row_ptr[end + 1] - a.row_ptr[end]);
        if (end > g &&
            std::abs(with_next - target) >= std::abs(best - target))
          break;
        best = with_next;
        ++end;
      }
      if (end == g) end = g + 1;  // never leave a rank empty
      for (index_t k = g; k < end; ++k) p.rank_of_row[k] = r;
      g = end;
      prefix = best;
    }
    for (; g < a.n_rows; ++g) p.rank_of_row[g] = n - 1;
  }
  p.finalize();
  return p;
}

/// Reads an external partition vector (one rank id per line, one line
/// per row), the output convention of graph partitioners.
inline Partition read_partition_vector(const std::string& path, int n,
                                       index_t n_rows) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Partition p;
  p.n_ranks = n;
  p.rank_of_row.reserve(n_rows);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    long v;
    try {
      v = std::stol(line);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": not an integer");
    }
    if (v < 0 || v >= n)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": rank id out of range");
    p.rank_of_row.push_back(static_cast<int>(v));
  }
  if (static_cast<index_t>(p.rank_of_row.size()) != n_rows)
    throw std::runtime_error(path + ": expected " + std::to_string(n_rows) +
                             " lines, got " +
                             std::to_string(p.rank_of_row.size()));
  p.finalize();
  return p;
}

inline void write_partition_vector(const Partition& p,
                                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (int r : p.rank_of_row) out << r << "\n";
}

}  // namespace mpk
