#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "mpk/crs.hpp"

namespace mpk {

/// Symmetrized structure of a matrix (no values, no self loops).
struct Adjacency {
  index_t n_vertices = 0;
  std::vector<index_t> ptr;  // n_vertices+1
  std::vector<index_t> nbr;  // sorted per vertex
};

/// Pattern union of A and A^T with the diagonal dropped.
inline Adjacency symmetrize_pattern(const CrsMatrix& a) {
  if (a.n_rows != a.n_cols)
    throw std::invalid_argument("symmetrize_pattern: matrix must be square");
  const index_t n = a.n_rows;
  std::vector<index_t> deg(n + 1, 0);
  auto each_edge = [&](auto&& f) {
    for (index_t i = 0; i < n; ++i)
      for (index_t j = a.row_ptr[i]; j < a.row_ptr[i + 1]; ++j)
        if (a.col_idx[j] != i) {
          f(i, a.col_idx[j]);
          f(a.col_idx[j], i);
        }
  };
  each_edge([&](index_t u, index_t) { ++deg[u + 1]; });
  for (index_t i = 0; i < n; ++i) deg[i + 1] += deg[i];
  std::vector<index_t> tmp(deg.back());
  {
    std::vector<index_t> cur(deg.begin(), deg.end() - 1);
    each_edge([&](index_t u, index_t v) { tmp[cur[u]++] = v; });
  }
  Adjacency g;
  g.n_vertices = n;
  g.ptr.assign(n + 1, 0);
  g.nbr.reserve(tmp.size());
  for (index_t i = 0; i < n; ++i) {
    auto b = tmp.begin() + deg[i], e = tmp.begin() + deg[i + 1];
    std::sort(b, e);
    auto ue = std::unique(b, e);
    g.nbr.insert(g.nbr.end(), b, ue);
    g.ptr[i + 1] = static_cast<index_t>(g.nbr.size());
  }
  return g;
}

/// Partition of the vertices into BFS levels, plus the induced
/// symmetric permutation. Level i holds the vertices at BFS distance i
/// from the root set; neighboring vertices differ by at most one level.
struct LevelSet {
  std::vector<index_t> level_ptr;      // n_levels+1, offsets into vertex_order
  std::vector<index_t> vertex_order;   // new -> old
  std::vector<index_t> inverse_order;  // old -> new
  std::vector<index_t> level_of;       // per old vertex
  std::vector<int> caps;               // per level, maximum power
  index_t n_root_levels = 0;           // levels reachable from the root set

  index_t n_levels() const {
    return static_cast<index_t>(level_ptr.size()) - 1;
  }
  index_t level_size(index_t l) const {
    return level_ptr[l + 1] - level_ptr[l];
  }
};

/// Single- or multi-source BFS. Empty root set defaults to vertex 0.
/// When the frontier empties with vertices remaining, BFS restarts from
/// the smallest-index unvisited vertex; the restarted component's
/// levels are appended after the current maximum. Within a level,
/// vertices appear in ascending original index. caps is left empty.
inline LevelSet bfs_levels(const Adjacency& g, std::span<const index_t> roots) {
  const index_t n = g.n_vertices;
  LevelSet ls;
  ls.level_of.assign(n, -1);
  ls.vertex_order.reserve(n);
  ls.level_ptr.push_back(0);
  std::vector<index_t> frontier;
  if (roots.empty()) {
    if (n > 0) frontier.push_back(0);
  } else {
    frontier.assign(roots.begin(), roots.end());
    std::sort(frontier.begin(), frontier.end());
    frontier.erase(std::unique(frontier.begin(), frontier.end()),
                   frontier.end());
  }
  index_t next_unvisited = 0;
  index_t visited = 0;
  bool first_component = true;
  while (visited < n) {
    if (frontier.empty()) {
      while (next_unvisited < n && ls.level_of[next_unvisited] >= 0)
        ++next_unvisited;
      frontier.push_back(next_unvisited);
    }
    // expand this component level by level
    index_t level = static_cast<index_t>(ls.level_ptr.size()) - 1;
    while (!frontier.empty()) {
      for (index_t v : frontier) {
        ls.level_of[v] = level;
        ls.vertex_order.push_back(v);
      }
      visited += static_cast<index_t>(frontier.size());
      ls.level_ptr.push_back(static_cast<index_t>(ls.vertex_order.size()));
      std::vector<index_t> next;
      for (index_t v : frontier)
        for (index_t j = g.ptr[v]; j < g.ptr[v + 1]; ++j) {
          const index_t w = g.nbr[j];
          if (ls.level_of[w] < 0) {
            ls.level_of[w] = level + 1;  // provisional mark
            next.push_back(w);
          }
        }
      std::sort(next.begin(), next.end());
      frontier = std::move(next);
      ++level;
    }
    if (first_component) {
      ls.n_root_levels = static_cast<index_t>(ls.level_ptr.size()) - 1;
      first_component = false;
    }
  }
  ls.inverse_order.assign(n, 0);
  for (index_t k = 0; k < n; ++k) ls.inverse_order[ls.vertex_order[k]] = k;
  return ls;
}

/// Applies the level permutation symmetrically: row and column `old` of
/// A become row/column inverse_order[old]. Rows are re-canonicalized.
inline CrsMatrix permute_symmetric(const CrsMatrix& a,
                                   const LevelSet& levels) {
  if (a.n_rows != a.n_cols ||
      a.n_rows != static_cast<index_t>(levels.inverse_order.size()))
    throw std::invalid_argument("permute_symmetric: size mismatch");
  CrsMatrix b;
  b.n_rows = a.n_rows;
  b.n_cols = a.n_cols;
  b.row_ptr.assign(a.n_rows + 1, 0);
  b.col_idx.resize(a.nnz());
  b.values.resize(a.nnz());
  for (index_t nr = 0; nr < b.n_rows; ++nr) {
    const index_t orow = levels.vertex_order[nr];
    b.row_ptr[nr + 1] = b.row_ptr[nr] + (a.row_ptr[orow + 1] - a.row_ptr[orow]);
    index_t out = b.row_ptr[nr];
    std::vector<std::pair<index_t, double>> entries;
    for (index_t j = a.row_ptr[orow]; j < a.row_ptr[orow + 1]; ++j)
      entries.emplace_back(levels.inverse_order[a.col_idx[j]], a.values[j]);
    std::sort(entries.begin(), entries.end());
    for (const auto& [c, v] : entries) {
      b.col_idx[out] = c;
      b.values[out] = v;
      ++out;
    }
  }
  return b;
}

/// Contiguous runs of levels merged under a cache budget. Every window
/// of p_m+1 consecutive groups should fit within C*safety bytes so a
/// level's matrix data survives in cache until its next wavefront use.
struct GroupedLevels {
  std::vector<index_t> group_ptr;        // n_groups+1, offsets into levels
  std::vector<std::int64_t> group_bytes; // per group
  std::vector<int> group_caps;           // per group (uniform within group)
  bool window_fits = false;
  std::int64_t cache_budget = 0;         // C * safety
  int p_m = 1;

  index_t n_groups() const {
    return static_cast<index_t>(group_ptr.size()) - 1;
  }
};

/// Greedy left-to-right level merging. Levels with different caps are
/// never merged (this keeps boundary levels I_k out of the bulk M).
/// If everything fits within C*safety a single group per cap-run is
/// used; otherwise the per-group byte cap is C*safety/(p_m+1).
inline GroupedLevels form_level_groups(std::span<const std::int64_t> level_bytes,
                                       std::span<const int> caps,
                                       std::int64_t cache_bytes, int p_m,
                                       double safety = 0.9) {
  if (cache_bytes <= 0) throw std::invalid_argument("cache size must be > 0");
  if (p_m < 1) throw std::invalid_argument("p_m must be >= 1");
  const index_t n_levels = static_cast<index_t>(level_bytes.size());
  GroupedLevels gl;
  gl.p_m = p_m;
  gl.cache_budget = static_cast<std::int64_t>(
      static_cast<double>(cache_bytes) * safety);
  std::int64_t total = 0;
  for (auto b : level_bytes) total += b;
  const std::int64_t per_group_cap =
      total <= gl.cache_budget ? total : gl.cache_budget / (p_m + 1);

  gl.group_ptr.push_back(0);
  index_t l = 0;
  while (l < n_levels) {
    std::int64_t bytes = level_bytes[l];
    const int cap = caps.empty() ? p_m : caps[l];
    index_t r = l + 1;
    while (r < n_levels && (caps.empty() || caps[r] == cap) &&
           bytes + level_bytes[r] <= per_group_cap)
      bytes += level_bytes[r++];
    gl.group_ptr.push_back(r);
    gl.group_bytes.push_back(bytes);
    gl.group_caps.push_back(cap);
    l = r;
  }
  // check the reuse-window condition on the result
  const index_t g = gl.n_groups();
  const index_t win = std::min<index_t>(g, p_m + 1);
  gl.window_fits = true;
  std::int64_t sum = 0;
  for (index_t i = 0; i < g; ++i) {
    sum += gl.group_bytes[i];
    if (i >= win) sum -= gl.group_bytes[i - win];
    if (i + 1 >= win && sum > gl.cache_budget) gl.window_fits = false;
  }
  return gl;
}

/// One wavefront task: raise all rows of a group to the given power.
struct Task {
  index_t group;
  int power;
};

struct Schedule {
  std::vector<Task> tasks;
};

/// Diagonal traversal of the (group, power) grid: diagonals
/// d = group + power in ascending order, ascending power within a
/// diagonal. Tasks with power beyond the group's cap are skipped.
inline Schedule wavefront_schedule(index_t n_groups,
                                   std::span<const int> caps, int p_m) {
  Schedule s;
  for (index_t g = 0; g < n_groups; ++g)
    if (caps[g] < 0 || caps[g] > p_m)
      throw std::invalid_argument("wavefront_schedule: cap out of range");
  for (index_t d = 1; d <= n_groups - 1 + p_m && n_groups > 0; ++d)
    for (int p = 1; p <= p_m; ++p) {
      const index_t g = d - p;
      if (g < 0 || g >= n_groups) continue;
      if (p > caps[g]) continue;
      s.tasks.push_back({g, p});
    }
  return s;
}

/// Replays a schedule and verifies that every task's upstream tasks
/// (g-1,p-1), (g,p-1), (g+1,p-1) have completed first (those that exist
/// under the caps). Returns true when the order is dependency-safe.
inline bool schedule_is_safe(const Schedule& s, index_t n_groups,
                             std::span<const int> caps, int p_m) {
  std::vector<int> done(n_groups, 0);  // highest completed power per group
  auto ready = [&](index_t g, int p) {
    for (index_t d = g > 0 ? g - 1 : 0; d <= std::min(g + 1, n_groups - 1); ++d)
      if (caps[d] >= p - 1 && done[d] < p - 1) return false;
    return true;
  };
  for (const Task& t : s.tasks) {
    if (t.power != done[t.group] + 1) return false;
    if (!ready(t.group, t.power)) return false;
    done[t.group] = t.power;
  }
  for (index_t g = 0; g < n_groups; ++g)
    if (done[g] != std::min(caps[g], p_m)) return false;
  return true;
}

}  // namespace mpk
