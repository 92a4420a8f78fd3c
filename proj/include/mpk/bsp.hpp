#pragma once

#include <barrier>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <thread>
#include <variant>
#include <vector>

#include "mpk/rank_plan.hpp"

namespace mpk {

/// Dense per-rank storage y[p][row] for powers 0..p_m over the local
/// vector layout [owned rows | halo slots].
template <class T>
struct PowerTable {
  index_t n_local = 0;
  index_t width = 0;  // n_local + halo width
  std::vector<std::vector<T>> slots;

  PowerTable() = default;
  PowerTable(index_t n_local_, index_t width_, int n_slots)
      : n_local(n_local_), width(width_),
        slots(n_slots, std::vector<T>(width_, T{})) {}

  std::span<T> slot(int p) { return slots.at(p); }
  std::span<const T> slot(int p) const { return slots.at(p); }
};

/// Generic halo exchange descriptor: who sends which local rows to
/// whom, and into which destination slots they land.
struct ExchangeLinks {
  struct Link {
    int src = -1, dst = -1;
    std::vector<index_t> src_rows;   // src-local rows, in slot order
    index_t dst_slot_begin = 0;      // first destination vector index
    std::vector<index_t> dst_slots;  // explicit targets; empty = contiguous
  };
  std::vector<Link> links;  // ordered by (src, dst)
  std::int64_t total_elements = 0;
};

/// The plan's whole-halo exchange: every halo slot is refreshed from
/// its owner.
inline ExchangeLinks halo_links(std::span<const RankPlan> plans) {
  ExchangeLinks ex;
  for (const auto& pl : plans)
    for (std::size_t li = 0; li < pl.send.size(); ++li) {
      const auto& s = pl.send[li];
      ExchangeLinks::Link link;
      link.src = pl.rank;
      link.dst = s.rank;
      link.src_rows = s.rows;
      // destination range: the receiver's slots for this owner
      for (const auto& rr : plans[s.rank].recv)
        if (rr.rank == pl.rank) link.dst_slot_begin = plans[s.rank].n_local + rr.slot_begin;
      ex.total_elements += static_cast<std::int64_t>(s.rows.size());
      ex.links.push_back(std::move(link));
    }
  return ex;
}

struct ExchangeStats {
  std::int64_t exchanges = 0;
  std::int64_t elements = 0;
};

struct TraceEntry {
  int phase = 0;
  int src = 0;
  int dst = 0;
  std::int64_t bytes = 0;
};

enum class Executor { Sequential, Threaded };

/// Bulk-synchronous program over n logical ranks: an ordered phase
/// list, each phase either rank-local compute or a rendezvous halo
/// exchange of one power slot. All ranks execute the same phase
/// sequence; identical inputs give bitwise identical outputs under
/// either executor.
template <class T>
struct BspProgram {
  struct Compute {
    std::function<void(int rank)> fn;
  };
  struct Exchange {
    int slot = 0;
    const ExchangeLinks* links = nullptr;
  };
  using Phase = std::variant<Compute, Exchange>;
  std::vector<Phase> phases;

  void compute(std::function<void(int rank)> fn) {
    phases.push_back(Compute{std::move(fn)});
  }
  void exchange(int slot, const ExchangeLinks& links) {
    phases.push_back(Exchange{slot, &links});
  }
};

template <class T>
void run_bsp(int n_ranks, std::vector<PowerTable<T>>& tables,
             const BspProgram<T>& program, Executor exec,
             ExchangeStats* stats = nullptr,
             std::vector<TraceEntry>* trace = nullptr) {
  if (static_cast<int>(tables.size()) != n_ranks)
    throw std::invalid_argument("run_bsp: one table per rank required");

  auto record = [&](int phase_idx, const ExchangeLinks& ex) {
    if (stats) {
      ++stats->exchanges;
      stats->elements += ex.total_elements;
    }
    if (trace)
      for (const auto& l : ex.links)
        trace->push_back({phase_idx, l.src, l.dst,
                          static_cast<std::int64_t>(l.src_rows.size() *
                                                    sizeof(T))});
  };

  if (exec == Executor::Sequential) {
    int phase_idx = 0;
    for (const auto& ph : program.phases) {
      if (const auto* c = std::get_if<typename BspProgram<T>::Compute>(&ph)) {
        for (int r = 0; r < n_ranks; ++r) c->fn(r);
      } else {
        const auto& e = std::get<typename BspProgram<T>::Exchange>(ph);
        // rendezvous: gather all payloads, then deliver
        std::vector<std::vector<T>> payload(e.links->links.size());
        for (std::size_t i = 0; i < e.links->links.size(); ++i) {
          const auto& l = e.links->links[i];
          auto src = tables[l.src].slot(e.slot);
          payload[i].reserve(l.src_rows.size());
          for (index_t row : l.src_rows) payload[i].push_back(src[row]);
        }
        for (std::size_t i = 0; i < e.links->links.size(); ++i) {
          const auto& l = e.links->links[i];
          auto dst = tables[l.dst].slot(e.slot);
          if (l.dst_slots.empty()) {
            if (l.dst_slot_begin + payload[i].size() > dst.size())
              throw std::runtime_error("run_bsp: message exceeds halo region");
            for (std::size_t k = 0; k < payload[i].size(); ++k)
              dst[l.dst_slot_begin + k] = payload[i][k];
          } else {
            if (l.dst_slots.size() != payload[i].size())
              throw std::runtime_error("run_bsp: message size mismatch");
            for (std::size_t k = 0; k < payload[i].size(); ++k)
              dst[l.dst_slots[k]] = payload[i][k];
          }
        }
        record(phase_idx, *e.links);
      }
      ++phase_idx;
    }
    return;
  }

  // thread-per-rank executor; exchanges synchronize on a shared barrier
  std::barrier sync(n_ranks);
  std::vector<std::vector<std::vector<T>>> mailbox(program.phases.size());
  for (std::size_t p = 0; p < program.phases.size(); ++p)
    if (const auto* e =
            std::get_if<typename BspProgram<T>::Exchange>(&program.phases[p]))
      mailbox[p].resize(e->links->links.size());

  auto worker = [&](int rank) {
    int phase_idx = 0;
    for (const auto& ph : program.phases) {
      if (const auto* c = std::get_if<typename BspProgram<T>::Compute>(&ph)) {
        c->fn(rank);
        sync.arrive_and_wait();
      } else {
        const auto& e = std::get<typename BspProgram<T>::Exchange>(ph);
        auto& box = mailbox[phase_idx];
        for (std::size_t i = 0; i < e.links->links.size(); ++i) {
          const auto& l = e.links->links[i];
          if (l.src != rank) continue;
          auto src = tables[rank].slot(e.slot);
          box[i].clear();
          box[i].reserve(l.src_rows.size());
          for (index_t row : l.src_rows) box[i].push_back(src[row]);
        }
        sync.arrive_and_wait();
        for (std::size_t i = 0; i < e.links->links.size(); ++i) {
          const auto& l = e.links->links[i];
          if (l.dst != rank) continue;
          auto dst = tables[rank].slot(e.slot);
          if (l.dst_slots.empty()) {
            for (std::size_t k = 0; k < box[i].size(); ++k)
              dst[l.dst_slot_begin + k] = box[i][k];
          } else {
            for (std::size_t k = 0; k < box[i].size(); ++k)
              dst[l.dst_slots[k]] = box[i][k];
          }
        }
        sync.arrive_and_wait();
        if (rank == 0) record(phase_idx, *e.links);
      }
      ++phase_idx;
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(n_ranks);
  for (int r = 0; r < n_ranks; ++r) threads.emplace_back(worker, r);
  for (auto& t : threads) t.join();
}

}  // namespace mpk
