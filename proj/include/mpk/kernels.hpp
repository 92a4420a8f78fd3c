#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "mpk/bsp.hpp"
#include "mpk/leveling.hpp"
#include "mpk/rank_plan.hpp"

namespace mpk {

/// Row-range apply contract. Writes slot `out_slot` for local rows
/// [row_begin, row_end), reading earlier slots only. The default is a
/// plain SpMV over the plan's local matrix; the Chebyshev application
/// supplies a fused recursion variant.
template <class T>
using KernelCallback = std::function<void(
    const RankPlan&, PowerTable<T>&, int out_slot, index_t row_begin,
    index_t row_end)>;

template <class T>
void spmv_rows(const RankPlan& plan, PowerTable<T>& table, int out_slot,
               index_t row_begin, index_t row_end) {
  const CrsMatrix& a = plan.a_local;
  auto in = table.slot(out_slot - 1);
  auto out = table.slot(out_slot);
  for (index_t r = row_begin; r < row_end; ++r) {
    T sum{};
    for (index_t j = a.row_ptr[r]; j < a.row_ptr[r + 1]; ++j)
      sum += a.values[j] * in[a.col_idx[j]];
    out[r] = sum;
  }
}

template <class T>
KernelCallback<T> spmv_callback() {
  return [](const RankPlan& p, PowerTable<T>& t, int s, index_t b, index_t e) {
    spmv_rows<T>(p, t, s, b, e);
  };
}

struct RunCounters {
  std::int64_t owned_row_updates = 0;
  std::int64_t redundant_row_updates = 0;
  ExchangeStats exchange;
};

template <class T>
struct MpkRun {
  std::vector<PowerTable<T>> tables;
  RunCounters counters;
  std::vector<TraceEntry> trace;
};

namespace detail {

template <class T>
std::vector<PowerTable<T>> init_tables(std::span<const RankPlan> plans,
                                       std::span<const T> x, int n_slots) {
  std::vector<PowerTable<T>> tables;
  tables.reserve(plans.size());
  for (const auto& pl : plans) {
    PowerTable<T> t(pl.n_local, pl.n_local + pl.n_halo, n_slots);
    auto s0 = t.slot(0);
    for (index_t r = 0; r < pl.n_local; ++r) s0[r] = x[pl.global_row[r]];
    tables.push_back(std::move(t));
  }
  return tables;
}

}  // namespace detail

/// Un-permutes one power slot of every rank back to global row order.
template <class T>
std::vector<T> gather_power(std::span<const RankPlan> plans,
                            const std::vector<PowerTable<T>>& tables, int p,
                            index_t n_rows) {
  std::vector<T> y(n_rows, T{});
  for (const auto& pl : plans) {
    auto s = tables[pl.rank].slot(p);
    for (index_t r = 0; r < pl.n_local; ++r) y[pl.global_row[r]] = s[r];
  }
  return y;
}

/// Traditional distributed MPK: p_m rounds of halo exchange followed by
/// a full local sweep.
template <class T>
MpkRun<T> trad_mpk(std::span<const RankPlan> plans, std::span<const T> x,
                   int p_m, const KernelCallback<T>& kernel,
                   Executor exec = Executor::Sequential,
                   bool want_trace = false) {
  if (p_m < 1) throw std::invalid_argument("trad_mpk: p_m must be >= 1");
  MpkRun<T> run;
  run.tables = detail::init_tables<T>(plans, x, p_m + 1);
  const ExchangeLinks links = halo_links(plans);
  BspProgram<T> prog;
  for (int p = 1; p <= p_m; ++p) {
    prog.exchange(p - 1, links);
    prog.compute([&, p](int rank) {
      kernel(plans[rank], run.tables[rank], p, 0, plans[rank].n_local);
    });
    for (const auto& pl : plans) run.counters.owned_row_updates += pl.n_local;
  }
  run_bsp<T>(static_cast<int>(plans.size()), run.tables, prog, exec,
             &run.counters.exchange, want_trace ? &run.trace : nullptr);
  return run;
}

/// Per-rank DLB artifacts: the cache-size-aware level grouping and the
/// wavefront schedule of the local phase.
struct DlbLocal {
  GroupedLevels groups;
  Schedule schedule;
  std::vector<std::pair<index_t, index_t>> group_rows;  // per group
};

inline DlbLocal dlb_local_schedule(const RankPlan& plan,
                                   std::int64_t cache_bytes,
                                   double safety = 0.9) {
  DlbLocal d;
  d.groups = form_level_groups(plan.level_bytes, plan.level_caps, cache_bytes,
                               plan.p_m, safety);
  d.schedule = wavefront_schedule(d.groups.n_groups(), d.groups.group_caps,
                                  plan.p_m);
  for (index_t g = 0; g < d.groups.n_groups(); ++g)
    d.group_rows.emplace_back(
        plan.levels.level_ptr[d.groups.group_ptr[g]],
        plan.levels.level_ptr[d.groups.group_ptr[g + 1]]);
  return d;
}

/// Distributed Level-Blocked MPK. Phase 1: exchange the input. Phase 2:
/// local wavefront raising the bulk M to p_m and each boundary level
/// I_k to k. Phase 3: p_m-1 rounds, each exchanging the next power and
/// advancing every unfinished I_k by one power. Owned results are
/// bitwise identical to trad_mpk.
template <class T>
MpkRun<T> dlb_mpk(std::span<const RankPlan> plans, std::span<const T> x,
                  int p_m, const KernelCallback<T>& kernel,
                  std::int64_t cache_bytes,
                  Executor exec = Executor::Sequential,
                  bool want_trace = false,
                  std::vector<DlbLocal>* locals_out = nullptr) {
  if (p_m < 1) throw std::invalid_argument("dlb_mpk: p_m must be >= 1");
  if (cache_bytes <= 0)
    throw std::invalid_argument("dlb_mpk: cache size must be > 0");
  MpkRun<T> run;
  run.tables = detail::init_tables<T>(plans, x, p_m + 1);
  const ExchangeLinks links = halo_links(plans);
  std::vector<DlbLocal> locals;
  locals.reserve(plans.size());
  for (const auto& pl : plans) {
    locals.push_back(dlb_local_schedule(pl, cache_bytes));
    for (const Task& t : locals.back().schedule.tasks) {
      const auto [b, e] = locals.back().group_rows[t.group];
      run.counters.owned_row_updates += e - b;
    }
  }

  BspProgram<T> prog;
  prog.exchange(0, links);
  prog.compute([&](int rank) {
    const auto& loc = locals[rank];
    for (const Task& t : loc.schedule.tasks) {
      const auto [b, e] = loc.group_rows[t.group];
      kernel(plans[rank], run.tables[rank], t.power, b, e);
    }
  });
  for (int p = 1; p <= p_m - 1; ++p) {
    prog.exchange(p, links);
    prog.compute([&, p](int rank) {
      const auto& pl = plans[rank];
      for (index_t k = 1; k <= pl.n_i_levels && k <= pl.p_m - p; ++k) {
        const auto [b, e] = pl.i_set(k);
        kernel(pl, run.tables[rank], k + p, b, e);
      }
    });
    for (const auto& pl : plans)
      for (index_t k = 1; k <= pl.n_i_levels && k <= p_m - p; ++k) {
        const auto [b, e] = pl.i_set(k);
        run.counters.owned_row_updates += e - b;
      }
  }
  run_bsp<T>(static_cast<int>(plans.size()), run.tables, prog, exec,
             &run.counters.exchange, want_trace ? &run.trace : nullptr);
  if (locals_out) *locals_out = std::move(locals);
  return run;
}

}  // namespace mpk
