#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "mpk/kernels.hpp"
#include "mpk/partition.hpp"

namespace mpk {

using cplx = std::complex<double>;

/// J_0(x)..J_n(x) by Miller's downward recurrence with normalization
/// J_0 + 2 sum_k J_2k = 1. Accurate to ~1e-14 for the moderate
/// arguments a Chebyshev time step produces.
inline std::vector<double> bessel_jn(int n, double x) {
  std::vector<double> j(n + 1, 0.0);
  const double ax = std::abs(x);
  if (ax == 0.0) {
    j[0] = 1.0;
    return j;
  }
  int start = std::max(n, static_cast<int>(ax)) + 1;
  start += static_cast<int>(2.0 * std::sqrt(static_cast<double>(start))) + 40;
  double jp1 = 0.0, jc = 1e-30, norm = 0.0;
  for (int k = start; k >= 1; --k) {
    const double jm1 = (2.0 * k / ax) * jc - jp1;
    jp1 = jc;
    jc = jm1;
    if (k - 1 <= n) j[k - 1] = jc;
    if (((k - 1) & 1) == 0) norm += (k - 1 == 0 ? 1.0 : 2.0) * jc;
    if (std::abs(jc) > 1e250) {  // rescale to avoid overflow
      const double s = 1e-250;
      jp1 *= s;
      jc *= s;
      norm *= s;
      for (auto& v : j) v *= s;
    }
  }
  for (auto& v : j) v /= norm;
  if (x < 0.0)
    for (int k = 1; k <= n; k += 2) j[k] = -j[k];
  return j;
}

/// Expansion coefficients for exp(-i dt (a*lambda + b)) in Chebyshev
/// polynomials T_k(lambda): c_0 = e^{-i b dt} J_0(a dt),
/// c_k = e^{-i b dt} 2 (-i)^k J_k(a dt).
inline std::vector<cplx> cheb_coeffs(int order, double dt, double scale_a,
                                     double shift_b) {
  if (order < 0) throw std::invalid_argument("cheb_coeffs: order must be >= 0");
  const auto j = bessel_jn(order, scale_a * dt);
  const cplx phase = std::exp(cplx(0.0, -shift_b * dt));
  std::vector<cplx> c(order + 1);
  c[0] = phase * j[0];
  cplx mi_pow(1.0, 0.0);
  const cplx mi(0.0, -1.0);
  for (int k = 1; k <= order; ++k) {
    mi_pow *= mi;
    c[k] = phase * 2.0 * mi_pow * j[k];
  }
  return c;
}

/// Gershgorin spectral bounds of a real symmetric matrix, padded by 1%:
/// (H - shift_b I)/scale_a has spectrum inside [-1, 1].
inline std::pair<double, double> spectral_bounds(const CrsMatrix& h) {
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (index_t i = 0; i < h.n_rows; ++i) {
    double center = 0.0, radius = 0.0;
    for (index_t j = h.row_ptr[i]; j < h.row_ptr[i + 1]; ++j) {
      if (h.col_idx[j] == i)
        center = h.values[j];
      else
        radius += std::abs(h.values[j]);
    }
    if (first) {
      lo = center - radius;
      hi = center + radius;
      first = false;
    } else {
      lo = std::min(lo, center - radius);
      hi = std::max(hi, center + radius);
    }
  }
  const double shift = 0.5 * (hi + lo);
  const double scale = std::max(0.5 * (hi - lo) * 1.01, 1e-12);
  return {scale, shift};
}

/// (H - b I)/a with the diagonal entry materialized in every row.
inline CrsMatrix rescale_hamiltonian(const CrsMatrix& h, double scale_a,
                                     double shift_b) {
  CrsMatrix s;
  s.n_rows = h.n_rows;
  s.n_cols = h.n_cols;
  s.row_ptr.assign(h.n_rows + 1, 0);
  const double inv_a = 1.0 / scale_a;
  for (index_t i = 0; i < h.n_rows; ++i) {
    bool has_diag = false;
    for (index_t j = h.row_ptr[i]; j < h.row_ptr[i + 1]; ++j)
      if (h.col_idx[j] == i) has_diag = true;
    s.row_ptr[i + 1] = s.row_ptr[i] + (h.row_ptr[i + 1] - h.row_ptr[i]) +
                       (has_diag ? 0 : 1);
  }
  s.col_idx.resize(s.row_ptr.back());
  s.values.resize(s.row_ptr.back());
  for (index_t i = 0; i < h.n_rows; ++i) {
    index_t out = s.row_ptr[i];
    bool placed_diag = false;
    for (index_t j = h.row_ptr[i]; j < h.row_ptr[i + 1]; ++j) {
      const index_t c = h.col_idx[j];
      if (!placed_diag && c > i) {
        s.col_idx[out] = i;
        s.values[out] = -shift_b * inv_a;
        placed_diag = true;
        ++out;
      }
      s.col_idx[out] = c;
      s.values[out] = c == i ? (h.values[j] - shift_b) * inv_a
                             : h.values[j] * inv_a;
      if (c == i) placed_diag = true;
      ++out;
    }
    if (!placed_diag) {
      s.col_idx[out] = i;
      s.values[out] = -shift_b * inv_a;
    }
  }
  return s;
}

struct WavePacketParams {
  double sigma = 1.0;
  std::array<double, 3> k0{0.0, 0.0, 0.0};
  std::array<index_t, 3> center{0, 0, 0};
};

/// Gaussian wave packet exp(-r^2/(2 sigma^2) + i k0.r), r measured from
/// the center site, normalized to unit 2-norm.
inline std::vector<cplx> wave_packet(const std::array<index_t, 3>& dims,
                                     const WavePacketParams& wp) {
  for (int d = 0; d < 3; ++d)
    if (wp.center[d] < 0 || wp.center[d] >= dims[d])
      throw std::invalid_argument("wave_packet: center outside lattice");
  if (wp.sigma <= 0.0) throw std::invalid_argument("wave_packet: sigma <= 0");
  const std::int64_t n = std::int64_t(dims[0]) * dims[1] * dims[2];
  std::vector<cplx> psi(n);
  double norm2 = 0.0;
  std::size_t idx = 0;
  for (index_t z = 0; z < dims[2]; ++z)
    for (index_t y = 0; y < dims[1]; ++y)
      for (index_t x = 0; x < dims[0]; ++x, ++idx) {
        const double rx = x - wp.center[0], ry = y - wp.center[1],
                     rz = z - wp.center[2];
        const double r2 = rx * rx + ry * ry + rz * rz;
        const double phase = wp.k0[0] * rx + wp.k0[1] * ry + wp.k0[2] * rz;
        const cplx a =
            std::exp(cplx(-r2 / (2.0 * wp.sigma * wp.sigma), phase));
        psi[idx] = a;
        norm2 += std::norm(a);
      }
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& a : psi) a *= inv;
  return psi;
}

struct Observables {
  double norm = 0.0;
  std::array<double, 3> center_of_mass{0.0, 0.0, 0.0};  // relative to center
};

inline Observables observables(const std::vector<cplx>& psi,
                               const std::array<index_t, 3>& dims,
                               const std::array<index_t, 3>& center) {
  Observables ob;
  double norm2 = 0.0;
  std::array<double, 3> com{0.0, 0.0, 0.0};
  std::size_t idx = 0;
  for (index_t z = 0; z < dims[2]; ++z)
    for (index_t y = 0; y < dims[1]; ++y)
      for (index_t x = 0; x < dims[0]; ++x, ++idx) {
        const double rho = std::norm(psi[idx]);
        norm2 += rho;
        com[0] += rho * (x - center[0]);
        com[1] += rho * (y - center[1]);
        com[2] += rho * (z - center[2]);
      }
  ob.norm = std::sqrt(norm2);
  for (int d = 0; d < 3; ++d)
    ob.center_of_mass[d] = norm2 > 0.0 ? com[d] / norm2 : 0.0;
  return ob;
}

inline std::vector<double> density(const std::vector<cplx>& psi) {
  std::vector<double> rho(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) rho[i] = std::norm(psi[i]);
  return rho;
}

enum class ChebBackend { Trad, Dlb };

struct PropagationParams {
  int cheb_order = 40;
  double dt = 0.1;
  int n_steps = 1;
  double scale_a = 0.0;  // 0: derive both from Gershgorin bounds
  double shift_b = 0.0;
  ChebBackend backend = ChebBackend::Dlb;
  int p_m = 4;
  std::int64_t cache_bytes = 8ll << 20;
  int n_ranks = 1;
  Executor exec = Executor::Sequential;
};

struct PropagationResult {
  std::vector<cplx> psi;
  std::vector<double> norms;  // per step
  RunCounters counters;       // accumulated over all kernel invocations
};

/// Chebyshev time propagation: per step, psi <- sum_k c_k v_k with the
/// three-term recursion v_{k+1} = 2 H~ v_k - v_{k-1}. The H~
/// applications run through the MPK backend in blocks of p_m, using a
/// fused callback that applies the recursion inside the kernel; the
/// trad and dlb backends produce bitwise identical states.
inline PropagationResult propagate(
    const CrsMatrix& h, const std::vector<cplx>& psi0,
    const PropagationParams& params,
    const std::function<void(int step, const std::vector<cplx>&)>& observer =
        nullptr) {
  if (params.cheb_order < 1)
    throw std::invalid_argument("propagate: cheb_order must be >= 1");
  if (params.p_m > params.cheb_order)
    throw std::invalid_argument("propagate: p_m must be <= cheb_order");
  if (h.n_rows != static_cast<index_t>(psi0.size()))
    throw std::invalid_argument("propagate: state size mismatch");

  double a = params.scale_a, b = params.shift_b;
  if (a == 0.0) std::tie(a, b) = spectral_bounds(h);
  const CrsMatrix hs = rescale_hamiltonian(h, a, b);
  const auto coeff = cheb_coeffs(params.cheb_order, params.dt, a, b);

  const Partition part =
      partition_rows(hs, params.n_ranks, PartitionStrategy::BlockRows);
  std::map<int, std::vector<RankPlan>> plans_for;  // per block power
  auto plans_of = [&](int p) -> const std::vector<RankPlan>& {
    auto it = plans_for.find(p);
    if (it == plans_for.end())
      it = plans_for.emplace(p, build_all_plans(hs, part, p)).first;
    return it->second;
  };

  PropagationResult res;
  res.psi = psi0;
  const index_t n = hs.n_rows;

  for (int step = 0; step < params.n_steps; ++step) {
    std::vector<cplx> v_prev = res.psi;  // v_0
    std::vector<cplx> acc(n);
    for (index_t i = 0; i < n; ++i) acc[i] = coeff[0] * v_prev[i];

    // v_1 = H~ v_0 via a single plain sweep
    const auto& plans1 = plans_of(1);
    std::vector<cplx> v_cur;
    {
      auto run = trad_mpk<cplx>(plans1, std::span<const cplx>(v_prev), 1,
                                spmv_callback<cplx>(), params.exec);
      v_cur = gather_power<cplx>(plans1, run.tables, 1, n);
      res.counters.owned_row_updates += run.counters.owned_row_updates;
      res.counters.exchange.exchanges += run.counters.exchange.exchanges;
      res.counters.exchange.elements += run.counters.exchange.elements;
    }
    if (params.cheb_order >= 1)
      for (index_t i = 0; i < n; ++i) acc[i] += coeff[1] * v_cur[i];

    int k = 1;
    while (k < params.cheb_order) {
      const int p = std::min(params.p_m, params.cheb_order - k);
      const auto& plans = plans_of(p);
      // per-rank local copy of v_{k-1} for the first recursion step
      std::vector<std::vector<cplx>> prev_local(plans.size());
      for (const auto& pl : plans) {
        auto& loc = prev_local[pl.rank];
        loc.resize(pl.n_local);
        for (index_t r = 0; r < pl.n_local; ++r)
          loc[r] = v_prev[pl.global_row[r]];
      }
      KernelCallback<cplx> fused = [&prev_local](const RankPlan& pl,
                                                 PowerTable<cplx>& t,
                                                 int out_slot, index_t rb,
                                                 index_t re) {
        const CrsMatrix& al = pl.a_local;
        auto in = t.slot(out_slot - 1);
        auto out = t.slot(out_slot);
        std::span<const cplx> prev =
            out_slot >= 2 ? std::span<const cplx>(t.slot(out_slot - 2))
                          : std::span<const cplx>(prev_local[pl.rank]);
        for (index_t r = rb; r < re; ++r) {
          cplx sum{};
          for (index_t j = al.row_ptr[r]; j < al.row_ptr[r + 1]; ++j)
            sum += al.values[j] * in[al.col_idx[j]];
          out[r] = 2.0 * sum - prev[r];
        }
      };
      MpkRun<cplx> run =
          params.backend == ChebBackend::Trad
              ? trad_mpk<cplx>(plans, std::span<const cplx>(v_cur), p, fused,
                               params.exec)
              : dlb_mpk<cplx>(plans, std::span<const cplx>(v_cur), p, fused,
                              params.cache_bytes, params.exec);
      res.counters.owned_row_updates += run.counters.owned_row_updates;
      res.counters.exchange.exchanges += run.counters.exchange.exchanges;
      res.counters.exchange.elements += run.counters.exchange.elements;
      std::vector<cplx> new_prev, new_cur;
      for (int j = 1; j <= p; ++j) {
        auto vk = gather_power<cplx>(plans, run.tables, j, n);
        for (index_t i = 0; i < n; ++i) acc[i] += coeff[k + j] * vk[i];
        if (j == p - 1)
          new_prev = std::move(vk);
        else if (j == p)
          new_cur = std::move(vk);
      }
      if (p == 1) new_prev = std::move(v_cur);
      v_prev = std::move(new_prev);
      v_cur = std::move(new_cur);
      k += p;
    }

    res.psi = std::move(acc);
    double norm2 = 0.0;
    for (const auto& z : res.psi) norm2 += std::norm(z);
    res.norms.push_back(std::sqrt(norm2));
    if (observer) observer(step, res.psi);
  }
  return res;
}

}  // namespace mpk
