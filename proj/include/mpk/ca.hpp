#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "mpk/kernels.hpp"

namespace mpk {

/// Per-rank CA-MPK preprocessing: external vertex sets E_k (E_0 = B),
/// the extended halo ordering, and the replicated remote matrix rows
/// that make the redundant local SpMVs possible.
struct CaPlan {
  int rank = 0;
  int p_m = 1;
  index_t n_local = 0;
  index_t n_ext = 0;  // total external slots, all E_k
  std::vector<index_t> ext_global;       // ext slot -> global row
  std::vector<int> ext_owner;
  std::vector<index_t> ext_owner_local;  // owner's plan-local row
  std::vector<index_t> e_ptr;            // distance-k offsets into ext slots
  // rows for E_0..E_{p_m-2} in ext slot order; columns renumbered to the
  // extended local numbering, entry order = original global column order
  CrsMatrix replicated;
  std::vector<int> target_power;  // per replicated row: p_m-1-k

  index_t n_e(index_t k) const { return e_ptr[k + 1] - e_ptr[k]; }
};

struct CaOverheads {
  std::vector<std::vector<index_t>> e_sizes;  // per rank, |E_k| for k=0..p_m-1
  std::int64_t additional_halo = 0;           // sum over ranks of |E_k|, k>=1
  std::int64_t redundant_row_spmvs = 0;
  std::int64_t redundant_nnz = 0;
  std::int64_t replicated_row_bytes = 0;
};

namespace detail {

/// External distance sets of one rank: E_0 = halo boundary, E_k = new
/// externals referenced by rows of E_{k-1}. Follows matrix rows, which
/// is the dependency direction of SpMV.
inline std::vector<std::vector<index_t>> external_sets(const CrsMatrix& a,
                                                       const Partition& part,
                                                       const RankPlan& plan,
                                                       int depth) {
  std::vector<std::vector<index_t>> e;
  std::vector<char> seen(a.n_rows, 0);
  e.push_back(plan.halo_global);  // already (owner, owner-local) ordered
  for (index_t v : e[0]) seen[v] = 1;
  for (int k = 1; k < depth; ++k) {
    std::vector<index_t> next;
    for (index_t v : e[k - 1])
      for (index_t j = a.row_ptr[v]; j < a.row_ptr[v + 1]; ++j) {
        const index_t c = a.col_idx[j];
        if (part.rank_of_row[c] == plan.rank || seen[c]) continue;
        seen[c] = 1;
        next.push_back(c);
      }
    std::sort(next.begin(), next.end());
    e.push_back(std::move(next));
  }
  return e;
}

}  // namespace detail

/// Pure analysis of CA-MPK overheads without executing anything.
inline CaOverheads ca_overheads(const CrsMatrix& a, const Partition& part,
                                std::span<const RankPlan> plans, int p_m) {
  CaOverheads oh;
  for (const auto& pl : plans) {
    auto e = detail::external_sets(a, part, pl, p_m);
    std::vector<index_t> sizes;
    for (int k = 0; k < p_m; ++k) {
      const auto& ek = e[k];
      sizes.push_back(static_cast<index_t>(ek.size()));
      if (k >= 1) oh.additional_halo += static_cast<std::int64_t>(ek.size());
      if (k <= p_m - 2) {
        oh.redundant_row_spmvs +=
            static_cast<std::int64_t>(ek.size()) * (p_m - 1 - k);
        for (index_t v : ek) {
          const std::int64_t nnz = a.row_ptr[v + 1] - a.row_ptr[v];
          oh.redundant_nnz += nnz * (p_m - 1 - k);
          oh.replicated_row_bytes += 4 + 12 * nnz;
        }
      }
    }
    oh.e_sizes.push_back(std::move(sizes));
  }
  return oh;
}

/// Builds every rank's CA plan. The first |E_0| extended slots coincide
/// with the base plan's halo slots (same ordering), so the owned local
/// matrix of the base plan is reused unchanged.
inline std::vector<CaPlan> build_ca_plans(const CrsMatrix& a,
                                          const Partition& part,
                                          std::span<const RankPlan> plans,
                                          int p_m) {
  std::vector<CaPlan> cps;
  cps.reserve(plans.size());
  for (const auto& pl : plans) {
    CaPlan cp;
    cp.rank = pl.rank;
    cp.p_m = p_m;
    cp.n_local = pl.n_local;
    auto e = detail::external_sets(a, part, pl, p_m);
    cp.e_ptr.push_back(0);
    for (const auto& ek : e) {
      cp.ext_global.insert(cp.ext_global.end(), ek.begin(), ek.end());
      cp.e_ptr.push_back(static_cast<index_t>(cp.ext_global.size()));
    }
    cp.n_ext = static_cast<index_t>(cp.ext_global.size());
    cp.ext_owner.resize(cp.n_ext);
    cp.ext_owner_local.resize(cp.n_ext);
    for (index_t s = 0; s < cp.n_ext; ++s)
      cp.ext_owner[s] = part.rank_of_row[cp.ext_global[s]];

    // replicated rows for E_0..E_{p_m-2}
    std::map<index_t, index_t> ext_slot;
    for (index_t s = 0; s < cp.n_ext; ++s) ext_slot[cp.ext_global[s]] = s;
    std::map<index_t, index_t> own_local;
    for (index_t r = 0; r < pl.n_local; ++r) own_local[pl.global_row[r]] = r;

    const index_t n_rep = p_m >= 2 ? cp.e_ptr[p_m - 1] : 0;
    CrsMatrix& rep = cp.replicated;
    rep.n_rows = n_rep;
    rep.n_cols = cp.n_local + cp.n_ext;
    rep.row_ptr.assign(n_rep + 1, 0);
    for (index_t s = 0; s < n_rep; ++s) {
      const index_t g = cp.ext_global[s];
      rep.row_ptr[s + 1] = rep.row_ptr[s] + (a.row_ptr[g + 1] - a.row_ptr[g]);
    }
    rep.col_idx.resize(rep.row_ptr.back());
    rep.values.resize(rep.row_ptr.back());
    cp.target_power.resize(n_rep);
    for (int k = 0; k + 1 < p_m; ++k)
      for (index_t s = cp.e_ptr[k]; s < cp.e_ptr[k + 1]; ++s)
        cp.target_power[s] = p_m - 1 - k;
    for (index_t s = 0; s < n_rep; ++s) {
      const index_t g = cp.ext_global[s];
      index_t out = rep.row_ptr[s];
      for (index_t j = a.row_ptr[g]; j < a.row_ptr[g + 1]; ++j) {
        const index_t c = a.col_idx[j];
        auto it = own_local.find(c);
        rep.col_idx[out] =
            it != own_local.end() ? it->second : cp.n_local + ext_slot.at(c);
        rep.values[out] = a.values[j];
        ++out;
      }
    }
    cps.push_back(std::move(cp));
  }

  // owner-local indices need the owners' plans
  {
    std::vector<std::vector<index_t>> inv(plans.size());
    for (const auto& pl : plans) {
      auto& m = inv[pl.rank];
      m.assign(a.n_rows, -1);
      for (index_t r = 0; r < pl.n_local; ++r) m[pl.global_row[r]] = r;
    }
    for (auto& cp : cps)
      for (index_t s = 0; s < cp.n_ext; ++s)
        cp.ext_owner_local[s] = inv[cp.ext_owner[s]][cp.ext_global[s]];
  }
  return cps;
}

/// The single extended exchange of CA-MPK: every ext slot (all E_k) is
/// filled with the owner's input value.
inline ExchangeLinks ca_links(std::span<const RankPlan> plans,
                              std::span<const CaPlan> cps) {
  ExchangeLinks ex;
  const int n = static_cast<int>(plans.size());
  for (int src = 0; src < n; ++src)
    for (int dst = 0; dst < n; ++dst) {
      if (src == dst) continue;
      // slots of dst owned by src, in ext slot order (not contiguous in
      // general, so explicit destination slots are used)
      ExchangeLinks::Link link;
      link.src = src;
      link.dst = dst;
      for (index_t s = 0; s < cps[dst].n_ext; ++s) {
        if (cps[dst].ext_owner[s] != src) continue;
        link.dst_slots.push_back(cps[dst].n_local + s);
        link.src_rows.push_back(cps[dst].ext_owner_local[s]);
      }
      if (link.src_rows.empty()) continue;
      ex.total_elements += static_cast<std::int64_t>(link.src_rows.size());
      ex.links.push_back(std::move(link));
    }
  return ex;
}

/// CA-MPK: one extended halo exchange, then purely local passes. Pass q
/// raises every owned row and every external row whose target power is
/// at least q. Owned results are bitwise identical to trad_mpk.
template <class T>
MpkRun<T> ca_mpk(const CrsMatrix& a, const Partition& part,
                 std::span<const RankPlan> plans, std::span<const T> x,
                 int p_m, const KernelCallback<T>& kernel,
                 Executor exec = Executor::Sequential,
                 bool want_trace = false, CaOverheads* oh_out = nullptr) {
  if (p_m < 1) throw std::invalid_argument("ca_mpk: p_m must be >= 1");
  auto cps = build_ca_plans(a, part, plans, p_m);
  MpkRun<T> run;
  run.tables.reserve(plans.size());
  for (std::size_t r = 0; r < plans.size(); ++r) {
    PowerTable<T> t(plans[r].n_local, plans[r].n_local + cps[r].n_ext,
                    p_m + 1);
    auto s0 = t.slot(0);
    for (index_t lr = 0; lr < plans[r].n_local; ++lr)
      s0[lr] = x[plans[r].global_row[lr]];
    run.tables.push_back(std::move(t));
  }
  const ExchangeLinks links = ca_links(plans, cps);

  BspProgram<T> prog;
  prog.exchange(0, links);
  for (int q = 1; q <= p_m; ++q) {
    prog.compute([&, q](int rank) {
      const auto& pl = plans[rank];
      const auto& cp = cps[rank];
      auto& table = run.tables[rank];
      kernel(pl, table, q, 0, pl.n_local);
      // redundant SpMVs on replicated external rows
      const CrsMatrix& rep = cp.replicated;
      auto in = table.slot(q - 1);
      auto out = table.slot(q);
      for (index_t s = 0; s < rep.n_rows; ++s) {
        if (cp.target_power[s] < q) continue;
        T sum{};
        for (index_t j = rep.row_ptr[s]; j < rep.row_ptr[s + 1]; ++j)
          sum += rep.values[j] * in[rep.col_idx[j]];
        out[cp.n_local + s] = sum;
      }
    });
    for (std::size_t r = 0; r < plans.size(); ++r) {
      run.counters.owned_row_updates += plans[r].n_local;
      for (index_t s = 0; s < cps[r].replicated.n_rows; ++s)
        if (cps[r].target_power[s] >= q) ++run.counters.redundant_row_updates;
    }
  }
  run_bsp<T>(static_cast<int>(plans.size()), run.tables, prog, exec,
             &run.counters.exchange, want_trace ? &run.trace : nullptr);
  if (oh_out) *oh_out = ca_overheads(a, part, plans, p_m);
  return run;
}

}  // namespace mpk
