#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mpk/crs.hpp"
#include "mpk/rng.hpp"

namespace mpk {

enum class StencilKind { FivePoint, SevenPoint };

struct AndersonParams {
  std::array<index_t, 3> dims{1, 1, 1};  // L_x, L_y, L_z
  double W = 0.0;                        // disorder strength
  double t = 1.0;                        // hopping along x
  double t_perp = 1.0;                   // hopping along y and z
  std::uint64_t seed = 0;
  std::vector<double> disorder;          // per-site w_r in [-1,1]; filled by gen
};

namespace detail {

inline void check_dims(const std::array<index_t, 3>& d) {
  if (d[0] < 1 || d[1] < 1 || d[2] < 1)
    throw std::invalid_argument("lattice extents must be >= 1");
}

/// Open-boundary nearest-neighbor lattice matrix. Row index is
/// x + L_x*y + L_x*L_y*z; neighbor columns are emitted in ascending
/// order (z-1, y-1, x-1, diag, x+1, y+1, z+1).
template <class DiagFn>
CrsMatrix lattice_matrix(const std::array<index_t, 3>& d, double hop_x,
                         double hop_yz, DiagFn diag) {
  check_dims(d);
  const std::int64_t n64 =
      std::int64_t(d[0]) * std::int64_t(d[1]) * std::int64_t(d[2]);
  if (n64 > std::numeric_limits<index_t>::max())
    throw std::invalid_argument("lattice too large for 32-bit indices");
  const index_t lx = d[0], ly = d[1], lz = d[2];
  const index_t n = static_cast<index_t>(n64);
  CrsMatrix a;
  a.n_rows = a.n_cols = n;
  a.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  // two passes: count, then fill
  std::int64_t nnz = 0;
  for (index_t z = 0; z < lz; ++z)
    for (index_t y = 0; y < ly; ++y)
      for (index_t x = 0; x < lx; ++x) {
        index_t deg = 1;  // diagonal always stored
        deg += (x > 0) + (x + 1 < lx) + (y > 0) + (y + 1 < ly) + (z > 0) +
               (z + 1 < lz);
        const index_t r = x + lx * y + lx * ly * z;
        a.row_ptr[r + 1] = deg;
        nnz += deg;
      }
  if (nnz > std::numeric_limits<index_t>::max())
    throw std::invalid_argument("matrix exceeds 32-bit nonzero count");
  for (index_t i = 0; i < n; ++i) a.row_ptr[i + 1] += a.row_ptr[i];
  a.col_idx.resize(nnz);
  a.values.resize(nnz);
  const index_t sy = lx, sz = lx * ly;
  for (index_t z = 0; z < lz; ++z)
    for (index_t y = 0; y < ly; ++y)
      for (index_t x = 0; x < lx; ++x) {
        const index_t r = x + sy * y + sz * z;
        index_t j = a.row_ptr[r];
        auto put = [&](index_t c, double v) {
          a.col_idx[j] = c;
          a.values[j] = v;
          ++j;
        };
        if (z > 0) put(r - sz, hop_yz);
        if (y > 0) put(r - sy, hop_yz);
        if (x > 0) put(r - 1, hop_x);
        put(r, diag(r));
        if (x + 1 < lx) put(r + 1, hop_x);
        if (y + 1 < ly) put(r + sy, hop_yz);
        if (z + 1 < lz) put(r + sz, hop_yz);
      }
  return a;
}

}  // namespace detail

/// Standard 5-point (2D) or 7-point (3D) Laplacian stencil with open
/// boundaries: diagonal 4 or 6, off-diagonals -1.
inline CrsMatrix gen_stencil(std::array<index_t, 3> dims, StencilKind kind) {
  if (kind == StencilKind::FivePoint) {
    if (dims[2] != 1)
      throw std::invalid_argument("5-point stencil requires L_z = 1");
    return detail::lattice_matrix(dims, -1.0, -1.0,
                                  [](index_t) { return 4.0; });
  }
  return detail::lattice_matrix(dims, -1.0, -1.0, [](index_t) { return 6.0; });
}

/// Anderson tight-binding Hamiltonian on an open rectangular lattice:
/// diagonal (W/2) w_r with w_r uniform in [-1,1) from the seeded
/// xoshiro256** stream (site order r = 0..N-1), hopping -t along x and
/// -t_perp along y/z. Fixed seed gives a bit-identical matrix; the
/// disorder vector used is written back into params.
inline CrsMatrix gen_anderson(AndersonParams& params) {
  detail::check_dims(params.dims);
  if (params.W < 0.0) throw std::invalid_argument("W must be >= 0");
  const std::int64_t n = std::int64_t(params.dims[0]) * params.dims[1] *
                         params.dims[2];
  if (params.disorder.empty()) {
    Xoshiro256ss rng(params.seed);
    params.disorder.resize(n);
    for (auto& w : params.disorder) w = rng.uniform_pm1();
  } else if (static_cast<std::int64_t>(params.disorder.size()) != n) {
    throw std::invalid_argument("disorder vector length != lattice size");
  }
  const double half_w = 0.5 * params.W;
  const auto& dis = params.disorder;
  return detail::lattice_matrix(params.dims, -params.t, -params.t_perp,
                                [&](index_t r) { return half_w * dis[r]; });
}

}  // namespace mpk
