#pragma once

#include <cstdint>
#include <list>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "mpk/leveling.hpp"

namespace mpk {

struct RooflineInput {
  double bs_bytes_per_s = 0.0;  // saturated memory load bandwidth
  double nnzr = 0.0;            // average nonzeros per row
};

/// Memory-bound CRS SpMV performance limit: bs / (6 B + 14 B / N_nzr)
/// flop/s, with 8-byte values and 4-byte indices.
inline double roofline_flops(const RooflineInput& in) {
  if (in.bs_bytes_per_s <= 0.0 || in.nnzr <= 0.0)
    throw std::invalid_argument("roofline: bs and nnzr must be > 0");
  return in.bs_bytes_per_s / (6.0 + 14.0 / in.nnzr);
}

/// 2 flops per stored nonzero per SpMV.
inline std::int64_t flop_count(std::int64_t n_nz, int p_m) {
  return 2 * n_nz * p_m;
}

struct TrafficReport {
  std::int64_t cache_bytes = 0;
  std::int64_t miss_bytes = 0;
  std::int64_t matrix_bytes = 0;
  double blocking_factor = 0.0;  // p_m * matrix_bytes / miss_bytes
};

/// Replays a matrix-block access sequence through a fully-associative
/// LRU cache of the given capacity, counting missed bytes. Blocks are
/// whole level groups; vector traffic is excluded on purpose (the
/// roofline already folds it in; this isolates matrix-data reuse).
inline TrafficReport lru_traffic(std::span<const index_t> access_order,
                                 std::span<const std::int64_t> block_bytes,
                                 std::int64_t cache_bytes, int p_m) {
  if (cache_bytes <= 0)
    throw std::invalid_argument("lru_traffic: cache size must be > 0");
  TrafficReport rep;
  rep.cache_bytes = cache_bytes;
  for (auto b : block_bytes) rep.matrix_bytes += b;

  std::list<index_t> lru;  // front = most recent
  std::map<index_t, std::list<index_t>::iterator> pos;
  std::int64_t resident = 0;
  for (index_t blk : access_order) {
    auto it = pos.find(blk);
    if (it != pos.end()) {
      lru.erase(it->second);
      lru.push_front(blk);
      it->second = lru.begin();
      continue;
    }
    rep.miss_bytes += block_bytes[blk];
    resident += block_bytes[blk];
    lru.push_front(blk);
    pos[blk] = lru.begin();
    while (resident > cache_bytes && !lru.empty()) {
      const index_t victim = lru.back();
      if (victim == blk && lru.size() == 1) break;  // block larger than cache
      lru.pop_back();
      pos.erase(victim);
      resident -= block_bytes[victim];
    }
  }
  rep.blocking_factor =
      rep.miss_bytes > 0
          ? static_cast<double>(p_m) * rep.matrix_bytes / rep.miss_bytes
          : 0.0;
  return rep;
}

/// TRAD access order: p_m full sweeps over all groups in sequence.
inline std::vector<index_t> trad_access_order(index_t n_groups, int p_m) {
  std::vector<index_t> order;
  order.reserve(static_cast<std::size_t>(n_groups) * p_m);
  for (int p = 0; p < p_m; ++p)
    for (index_t g = 0; g < n_groups; ++g) order.push_back(g);
  return order;
}

/// DLB access order: the wavefront schedule's group sequence.
inline std::vector<index_t> schedule_access_order(const Schedule& s) {
  std::vector<index_t> order;
  order.reserve(s.tasks.size());
  for (const Task& t : s.tasks) order.push_back(t.group);
  return order;
}

struct EfficiencyReport {
  std::vector<int> ranks;
  std::vector<double> efficiency;  // per entry of `ranks`
};

enum class ScalingMode { Strong, Weak };

/// Strong: T_1/(n T_n). Weak: T_1/T_n. The baseline entry must be
/// present in the timing table.
inline EfficiencyReport scaling_efficiency(
    const std::map<int, double>& times, ScalingMode mode, int baseline = 1) {
  auto it = times.find(baseline);
  if (it == times.end())
    throw std::invalid_argument("scaling_efficiency: baseline missing");
  const double t1 = it->second;
  EfficiencyReport rep;
  for (const auto& [n, tn] : times) {
    if (tn <= 0.0)
      throw std::invalid_argument("scaling_efficiency: times must be > 0");
    rep.ranks.push_back(n);
    const double scale =
        mode == ScalingMode::Strong ? static_cast<double>(n) / baseline : 1.0;
    rep.efficiency.push_back(t1 / (scale * tn));
  }
  return rep;
}

}  // namespace mpk
