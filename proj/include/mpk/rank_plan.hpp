#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "mpk/crs.hpp"
#include "mpk/leveling.hpp"
#include "mpk/partition.hpp"

namespace mpk {

/// One rank's local world: the renumbered local matrix, the halo map,
/// send/recv lists, and the boundary leveling I_1..I_{p_m-1} / bulk M.
///
/// Local rows are reordered as [I_1, I_2, ..., I_{p_m-1}, M by BFS
/// levels, unreachable components]. Columns are renumbered to
/// [0, n_local + n_halo): locals first, halo slots appended in
/// ascending (owner rank, owner-local row) order. Within each row the
/// stored entry order is the original ascending global column order,
/// which keeps per-row summation order identical to the global matrix.
struct RankPlan {
  int rank = 0;
  int n_ranks = 1;
  int p_m = 1;
  index_t n_local = 0;
  index_t n_halo = 0;
  CrsMatrix a_local;                      // rows ordered per plan, cols renumbered
  std::vector<index_t> global_row;        // local row -> global row
  std::vector<index_t> halo_global;       // halo slot -> global row
  std::vector<int> halo_owner;            // halo slot -> owner rank
  std::vector<index_t> halo_owner_local;  // halo slot -> owner-local row

  struct Link {
    int rank = -1;
    std::vector<index_t> rows;  // local rows to send, in slot order
  };
  struct RecvRange {
    int rank = -1;
    index_t slot_begin = 0, slot_end = 0;  // halo slots from this neighbor
  };
  std::vector<Link> send;       // ascending neighbor rank
  std::vector<RecvRange> recv;  // ascending neighbor rank

  LevelSet levels;                        // in local (post-reorder) numbering
  std::vector<int> level_caps;            // per level
  index_t n_i_levels = 0;                 // leading levels that are I_k sets
  std::vector<std::int64_t> level_bytes;  // CRS bytes of each level's rows

  index_t i_rows_end() const {
    return n_i_levels == 0 ? 0 : levels.level_ptr[n_i_levels];
  }
  index_t bulk_size() const { return n_local - i_rows_end(); }
  /// Row range of I_k, 1 <= k <= n_i_levels.
  std::pair<index_t, index_t> i_set(index_t k) const {
    return {levels.level_ptr[k - 1], levels.level_ptr[k]};
  }
};

struct OverheadReport {
  double o_mpi = 0.0;
  std::vector<double> o_dlb_per_rank;
  double o_dlb_global = 0.0;
  std::vector<index_t> n_halo_per_rank;
  std::vector<index_t> bulk_per_rank;
};

namespace detail {

/// Per-rank structure that depends only on this rank's rows: the local
/// reordering by distance from the halo boundary. Needed for the own
/// plan and for numbering the halo slots of plans that receive from us.
struct LocalOrder {
  std::vector<index_t> owned;        // ascending global rows
  std::vector<index_t> new_of_pre;   // pre-order local -> post-order local
  LevelSet levels;                   // in post-order numbering
  std::vector<int> caps;
  index_t n_i_levels = 0;
};

inline LocalOrder build_local_order(const CrsMatrix& a, const Partition& part,
                                    int rank, int p_m) {
  LocalOrder lo;
  lo.owned = part.rows[rank];
  const index_t nl = static_cast<index_t>(lo.owned.size());

  // local symmetrized adjacency in pre-order numbering, plus the set of
  // boundary-adjacent rows (rows referencing at least one remote column)
  std::vector<std::vector<index_t>> adj(nl);
  std::vector<index_t> boundary;
  for (index_t l = 0; l < nl; ++l) {
    const index_t g = lo.owned[l];
    bool touches_halo = false;
    for (index_t j = a.row_ptr[g]; j < a.row_ptr[g + 1]; ++j) {
      const index_t c = a.col_idx[j];
      if (c == g) continue;
      if (part.rank_of_row[c] == rank) {
        const index_t cl = part.local_index_of_row[c];
        adj[l].push_back(cl);
        adj[cl].push_back(l);
      } else {
        touches_halo = true;
      }
    }
    if (touches_halo) boundary.push_back(l);
  }
  Adjacency g;
  g.n_vertices = nl;
  g.ptr.assign(nl + 1, 0);
  for (index_t l = 0; l < nl; ++l) {
    auto& v = adj[l];
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    g.ptr[l + 1] = g.ptr[l] + static_cast<index_t>(v.size());
  }
  g.nbr.reserve(g.ptr.back());
  for (auto& v : adj) g.nbr.insert(g.nbr.end(), v.begin(), v.end());

  const bool distributed = !boundary.empty();
  LevelSet pre = bfs_levels(g, std::span<const index_t>(boundary));
  // caps: reachable level j is at distance j+1 from the boundary B when
  // the BFS was seeded from boundary-adjacent rows; unreachable
  // components carry no halo dependency and get the full power.
  const index_t n_levels = pre.n_levels();
  lo.caps.resize(n_levels);
  for (index_t j = 0; j < n_levels; ++j) {
    if (distributed && j < pre.n_root_levels)
      lo.caps[j] = std::min<index_t>(j + 1, p_m);
    else
      lo.caps[j] = p_m;
  }
  lo.n_i_levels = 0;
  if (distributed)
    lo.n_i_levels = std::min<index_t>(pre.n_root_levels, p_m - 1);

  // renumber the LevelSet into post-order local indices
  lo.new_of_pre.assign(nl, 0);
  for (index_t k = 0; k < nl; ++k) lo.new_of_pre[pre.vertex_order[k]] = k;
  lo.levels.level_ptr = pre.level_ptr;
  lo.levels.n_root_levels = pre.n_root_levels;
  lo.levels.vertex_order.resize(nl);
  lo.levels.inverse_order.resize(nl);
  for (index_t k = 0; k < nl; ++k) {
    lo.levels.vertex_order[k] = k;
    lo.levels.inverse_order[k] = k;
  }
  lo.levels.level_of.resize(nl);
  for (index_t k = 0; k < nl; ++k)
    lo.levels.level_of[k] = pre.level_of[pre.vertex_order[k]];
  lo.levels.caps = lo.caps;
  return lo;
}

}  // namespace detail

/// Builds every rank's plan in one pass (plans need the owners' local
/// orderings to number halo slots deterministically).
inline std::vector<RankPlan> build_all_plans(const CrsMatrix& a,
                                             const Partition& part, int p_m) {
  if (p_m < 1) throw std::invalid_argument("build_all_plans: p_m must be >= 1");
  if (a.n_rows != a.n_cols)
    throw std::invalid_argument("build_all_plans: matrix must be square");
  const int n = part.n_ranks;
  std::vector<detail::LocalOrder> order(n);
  for (int r = 0; r < n; ++r)
    order[r] = detail::build_local_order(a, part, r, p_m);

  auto local_of_global = [&](index_t g) {
    return order[part.rank_of_row[g]]
        .new_of_pre[part.local_index_of_row[g]];
  };

  std::vector<RankPlan> plans(n);
  for (int r = 0; r < n; ++r) {
    RankPlan& pl = plans[r];
    pl.rank = r;
    pl.n_ranks = n;
    pl.p_m = p_m;
    const auto& lo = order[r];
    pl.n_local = static_cast<index_t>(lo.owned.size());
    pl.levels = lo.levels;
    pl.level_caps = lo.caps;
    pl.n_i_levels = lo.n_i_levels;
    pl.global_row.resize(pl.n_local);
    for (index_t pre = 0; pre < pl.n_local; ++pre)
      pl.global_row[lo.new_of_pre[pre]] = lo.owned[pre];

    // distinct remote columns, ordered by (owner rank, owner-local row)
    std::vector<index_t> remote;
    for (index_t g : lo.owned)
      for (index_t j = a.row_ptr[g]; j < a.row_ptr[g + 1]; ++j)
        if (part.rank_of_row[a.col_idx[j]] != r)
          remote.push_back(a.col_idx[j]);
    std::sort(remote.begin(), remote.end());
    remote.erase(std::unique(remote.begin(), remote.end()), remote.end());
    std::sort(remote.begin(), remote.end(), [&](index_t x, index_t y) {
      const int ox = part.rank_of_row[x], oy = part.rank_of_row[y];
      if (ox != oy) return ox < oy;
      return local_of_global(x) < local_of_global(y);
    });
    pl.n_halo = static_cast<index_t>(remote.size());
    pl.halo_global = remote;
    pl.halo_owner.resize(pl.n_halo);
    pl.halo_owner_local.resize(pl.n_halo);
    for (index_t s = 0; s < pl.n_halo; ++s) {
      pl.halo_owner[s] = part.rank_of_row[remote[s]];
      pl.halo_owner_local[s] = local_of_global(remote[s]);
    }
    for (index_t s = 0; s < pl.n_halo;) {
      index_t e = s;
      while (e < pl.n_halo && pl.halo_owner[e] == pl.halo_owner[s]) ++e;
      pl.recv.push_back({pl.halo_owner[s], s, e});
      s = e;
    }

    // local matrix: rows in plan order, entries in original global
    // column order, columns renumbered
    std::map<index_t, index_t> slot_of_global;
    for (index_t s = 0; s < pl.n_halo; ++s)
      slot_of_global[pl.halo_global[s]] = pl.n_local + s;
    CrsMatrix& al = pl.a_local;
    al.n_rows = pl.n_local;
    al.n_cols = pl.n_local + pl.n_halo;
    al.row_ptr.assign(pl.n_local + 1, 0);
    for (index_t lr = 0; lr < pl.n_local; ++lr) {
      const index_t g = pl.global_row[lr];
      al.row_ptr[lr + 1] =
          al.row_ptr[lr] + (a.row_ptr[g + 1] - a.row_ptr[g]);
    }
    al.col_idx.resize(al.row_ptr.back());
    al.values.resize(al.row_ptr.back());
    for (index_t lr = 0; lr < pl.n_local; ++lr) {
      const index_t g = pl.global_row[lr];
      index_t out = al.row_ptr[lr];
      for (index_t j = a.row_ptr[g]; j < a.row_ptr[g + 1]; ++j) {
        const index_t c = a.col_idx[j];
        al.col_idx[out] = part.rank_of_row[c] == r ? local_of_global(c)
                                                   : slot_of_global[c];
        al.values[out] = a.values[j];
        ++out;
      }
    }

    // per-level matrix bytes (4 B per row pointer entry, 12 B per nonzero)
    pl.level_bytes.assign(pl.levels.n_levels(), 0);
    for (index_t lr = 0; lr < pl.n_local; ++lr)
      pl.level_bytes[pl.levels.level_of[lr]] +=
          4 + 12 * std::int64_t(al.row_ptr[lr + 1] - al.row_ptr[lr]);
  }

  // send lists, derived from every receiver's halo slots
  for (int dst = 0; dst < n; ++dst)
    for (const auto& rr : plans[dst].recv) {
      RankPlan::Link link;
      link.rank = dst;
      link.rows.reserve(rr.slot_end - rr.slot_begin);
      for (index_t s = rr.slot_begin; s < rr.slot_end; ++s)
        link.rows.push_back(plans[dst].halo_owner_local[s]);
      plans[rr.rank].send.push_back(std::move(link));
    }
  for (auto& pl : plans)
    std::sort(pl.send.begin(), pl.send.end(),
              [](const auto& x, const auto& y) { return x.rank < y.rank; });
  return plans;
}

/// Convenience wrapper for a single rank's plan.
inline RankPlan build_rank_plan(const CrsMatrix& a, const Partition& part,
                                int rank, int p_m) {
  return build_all_plans(a, part, p_m)[rank];
}

/// O_MPI: total halo rows over total rows.
inline double mpi_overhead(std::span<const RankPlan> plans) {
  std::int64_t halo = 0, rows = 0;
  for (const auto& pl : plans) {
    halo += pl.n_halo;
    rows += pl.n_local;
  }
  return rows == 0 ? 0.0 : static_cast<double>(halo) / rows;
}

/// Per-rank and global cache-blocking overheads: the fraction of rows
/// outside the bulk structure M.
inline OverheadReport dlb_overheads(std::span<const RankPlan> plans) {
  OverheadReport rep;
  rep.o_mpi = mpi_overhead(plans);
  std::int64_t rows = 0, outside = 0;
  for (const auto& pl : plans) {
    const index_t bulk = pl.bulk_size();
    rep.bulk_per_rank.push_back(bulk);
    rep.n_halo_per_rank.push_back(pl.n_halo);
    rep.o_dlb_per_rank.push_back(
        pl.n_local == 0 ? 0.0
                        : 1.0 - static_cast<double>(bulk) / pl.n_local);
    rows += pl.n_local;
    outside += pl.n_local - bulk;
  }
  rep.o_dlb_global = rows == 0 ? 0.0 : static_cast<double>(outside) / rows;
  return rep;
}

}  // namespace mpk
