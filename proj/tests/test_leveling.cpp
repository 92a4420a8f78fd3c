#include <gtest/gtest.h>

#include <set>

#include "mpk/generate.hpp"
#include "mpk/leveling.hpp"
#include "test_util.hpp"

using namespace mpk;

namespace {

index_t bandwidth(const CrsMatrix& a) {
  index_t bw = 0;
  for (index_t i = 0; i < a.n_rows; ++i)
    for (index_t j = a.row_ptr[i]; j < a.row_ptr[i + 1]; ++j)
      bw = std::max(bw, std::abs(a.col_idx[j] - i));
  return bw;
}

CrsMatrix chain(index_t n) {
  std::vector<index_t> r, c;
  std::vector<double> v;
  for (index_t i = 0; i + 1 < n; ++i) {
    r.push_back(i);
    c.push_back(i + 1);
    v.push_back(1.0);
    r.push_back(i + 1);
    c.push_back(i);
    v.push_back(1.0);
  }
  return crs_from_triplets(n, n, std::move(r), std::move(c), std::move(v));
}

}  // namespace

TEST(Symmetrize, SymmetricPatternUnchanged) {
  auto a = testutil::random_symmetric_pattern(40, 0.1, 2);
  auto g = symmetrize_pattern(a);
  for (index_t i = 0; i < 40; ++i) {
    std::set<index_t> want;
    for (index_t j = a.row_ptr[i]; j < a.row_ptr[i + 1]; ++j)
      if (a.col_idx[j] != i) want.insert(a.col_idx[j]);
    std::set<index_t> got(g.nbr.begin() + g.ptr[i], g.nbr.begin() + g.ptr[i + 1]);
    EXPECT_EQ(got, want) << "row " << i;
  }
}

TEST(Symmetrize, SingleEntryMakesOneEdge) {
  auto a = crs_from_triplets(2, 2, {0}, {1}, {1.0});
  auto g = symmetrize_pattern(a);
  EXPECT_EQ(g.ptr, (std::vector<index_t>{0, 1, 2}));
  EXPECT_EQ(g.nbr, (std::vector<index_t>{1, 0}));
}

TEST(Symmetrize, ResultIsSymmetric) {
  // nonsymmetric pattern: keep only the upper triangle of a random matrix
  auto a = testutil::random_symmetric_pattern(60, 0.08, 7);
  std::vector<index_t> r, c;
  std::vector<double> v;
  for (index_t i = 0; i < 60; ++i)
    for (index_t j = a.row_ptr[i]; j < a.row_ptr[i + 1]; ++j)
      if (a.col_idx[j] >= i) {
        r.push_back(i);
        c.push_back(a.col_idx[j]);
        v.push_back(1.0);
      }
  auto up = crs_from_triplets(60, 60, std::move(r), std::move(c), std::move(v));
  auto g = symmetrize_pattern(up);
  for (index_t u = 0; u < 60; ++u)
    for (index_t j = g.ptr[u]; j < g.ptr[u + 1]; ++j) {
      const index_t w = g.nbr[j];
      const bool back = std::binary_search(g.nbr.begin() + g.ptr[w],
                                           g.nbr.begin() + g.ptr[w + 1], u);
      EXPECT_TRUE(back) << u << "-" << w;
    }
}

TEST(BfsLevels, ChainFromEnd) {
  auto g = symmetrize_pattern(chain(5));
  auto ls = bfs_levels(g, {});
  ASSERT_EQ(ls.n_levels(), 5);
  for (index_t l = 0; l < 5; ++l) {
    EXPECT_EQ(ls.level_size(l), 1);
    EXPECT_EQ(ls.vertex_order[l], l);
  }
}

TEST(BfsLevels, StarFromCenter) {
  // vertex 0 is the hub of a 7-leaf star
  std::vector<index_t> r, c;
  std::vector<double> v;
  for (index_t leaf = 1; leaf <= 7; ++leaf) {
    r.push_back(0);
    c.push_back(leaf);
    v.push_back(1.0);
  }
  auto g = symmetrize_pattern(
      crs_from_triplets(8, 8, std::move(r), std::move(c), std::move(v)));
  std::vector<index_t> roots{0};
  auto ls = bfs_levels(g, roots);
  ASSERT_EQ(ls.n_levels(), 2);
  EXPECT_EQ(ls.level_size(0), 1);
  EXPECT_EQ(ls.level_size(1), 7);
}

TEST(BfsLevels, Grid3x3FromCorner) {
  auto g = symmetrize_pattern(gen_stencil({3, 3, 1}, StencilKind::FivePoint));
  auto ls = bfs_levels(g, {});
  ASSERT_EQ(ls.n_levels(), 5);
  const std::vector<index_t> sizes{1, 2, 3, 2, 1};
  for (index_t l = 0; l < 5; ++l) EXPECT_EQ(ls.level_size(l), sizes[l]);
}

TEST(BfsLevels, DisconnectedComponentsAppend) {
  // two chains: 0-1-2 and 3-4
  auto a = crs_from_triplets(5, 5, {0, 1, 1, 2, 3, 4}, {1, 0, 2, 1, 4, 3},
                             {1, 1, 1, 1, 1, 1});
  auto g = symmetrize_pattern(a);
  auto ls = bfs_levels(g, {});
  ASSERT_EQ(ls.n_levels(), 5);
  EXPECT_EQ(ls.n_root_levels, 3);
  EXPECT_EQ(ls.vertex_order, (std::vector<index_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(ls.level_of[3], 3);
  EXPECT_EQ(ls.level_of[4], 4);
}

TEST(BfsLevels, EdgeAndPartitionProperties) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    auto a = testutil::random_symmetric_pattern(120, 0.03, seed);
    auto g = symmetrize_pattern(a);
    auto ls = bfs_levels(g, {});
    // partition: every vertex exactly once
    std::vector<char> hit(120, 0);
    for (index_t v : ls.vertex_order) {
      EXPECT_FALSE(hit[v]);
      hit[v] = 1;
    }
    EXPECT_EQ(ls.vertex_order.size(), 120u);
    // edge property within the reachable component
    for (index_t u = 0; u < 120; ++u)
      for (index_t j = g.ptr[u]; j < g.ptr[u + 1]; ++j)
        EXPECT_LE(std::abs(ls.level_of[u] - ls.level_of[g.nbr[j]]), 1);
    // within-level ascending original index
    for (index_t l = 0; l < ls.n_levels(); ++l)
      for (index_t k = ls.level_ptr[l] + 1; k < ls.level_ptr[l + 1]; ++k)
        EXPECT_LT(ls.vertex_order[k - 1], ls.vertex_order[k]);
  }
}

TEST(Permute, LevelOrderedMatrixGetsIdentity) {
  auto a = chain(6);
  auto ls = bfs_levels(symmetrize_pattern(a), {});
  for (index_t k = 0; k < 6; ++k) EXPECT_EQ(ls.vertex_order[k], k);
  auto b = permute_symmetric(a, ls);
  EXPECT_EQ(a.col_idx, b.col_idx);
  EXPECT_EQ(a.values, b.values);
}

TEST(Permute, CommutesWithSpmv) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto a = testutil::random_symmetric_pattern(80, 0.05, seed);
    auto ls = bfs_levels(symmetrize_pattern(a), {});
    auto b = permute_symmetric(a, ls);
    auto x = testutil::random_int_vector(80, seed + 100);
    std::vector<double> px(80);
    for (index_t k = 0; k < 80; ++k) px[k] = x[ls.vertex_order[k]];
    auto pax = spmv(a, x);  // then permute
    auto bpx = spmv(b, px);
    for (index_t k = 0; k < 80; ++k)
      EXPECT_EQ(bpx[k], pax[ls.vertex_order[k]]);
  }
}

TEST(Permute, ReducesStencilBandwidth) {
  auto a = gen_stencil({30, 4, 1}, StencilKind::FivePoint);
  auto ls = bfs_levels(symmetrize_pattern(a), {});
  auto b = permute_symmetric(a, ls);
  EXPECT_LE(bandwidth(b), bandwidth(a));
}

TEST(Groups, EverythingFitsMakesOneGroup) {
  std::vector<std::int64_t> bytes(6, 1 << 20);
  auto gl = form_level_groups(bytes, {}, 64ll << 20, 3);
  EXPECT_EQ(gl.n_groups(), 1);
  EXPECT_TRUE(gl.window_fits);
  EXPECT_EQ(gl.group_bytes[0], 6ll << 20);
}

TEST(Groups, CacheBelowSingleLevelKeepsLevelsApart) {
  std::vector<std::int64_t> bytes(5, 1 << 20);
  auto gl = form_level_groups(bytes, {}, 1 << 19, 2);
  EXPECT_EQ(gl.n_groups(), 5);
  EXPECT_FALSE(gl.window_fits);
}

TEST(Groups, TenEqualLevelsMergeInPairs) {
  // 10 levels of 1 MiB, p_m=3, C=9 MiB: budget 8.1 MiB across a
  // 4-group window caps each group at 2 levels
  std::vector<std::int64_t> bytes(10, 1 << 20);
  auto gl = form_level_groups(bytes, {}, 9ll << 20, 3);
  EXPECT_EQ(gl.n_groups(), 5);
  for (index_t g = 0; g < 5; ++g)
    EXPECT_EQ(gl.group_ptr[g + 1] - gl.group_ptr[g], 2);
  EXPECT_TRUE(gl.window_fits);
}

TEST(Groups, CapBoundariesNeverMerge) {
  std::vector<std::int64_t> bytes(4, 100);
  std::vector<int> caps{1, 2, 3, 3};
  auto gl = form_level_groups(bytes, caps, 1 << 20, 3);
  ASSERT_EQ(gl.n_groups(), 3);
  EXPECT_EQ(gl.group_caps, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(gl.group_ptr, (std::vector<index_t>{0, 1, 2, 4}));
}

TEST(Groups, RejectsBadArguments) {
  std::vector<std::int64_t> bytes{1};
  EXPECT_THROW(form_level_groups(bytes, {}, 0, 2), std::invalid_argument);
  EXPECT_THROW(form_level_groups(bytes, {}, 100, 0), std::invalid_argument);
}

TEST(Wavefront, ThreeGroupsPmTwo) {
  std::vector<int> caps{2, 2, 2};
  auto s = wavefront_schedule(3, caps, 2);
  ASSERT_EQ(s.tasks.size(), 6u);
  const std::vector<std::pair<index_t, int>> want{{0, 1}, {1, 1}, {0, 2},
                                                  {2, 1}, {1, 2}, {2, 2}};
  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_EQ(s.tasks[i].group, want[i].first);
    EXPECT_EQ(s.tasks[i].power, want[i].second);
  }
}

TEST(Wavefront, TenGroupsPmFive) {
  std::vector<int> caps(10, 5);
  auto s = wavefront_schedule(10, caps, 5);
  EXPECT_EQ(s.tasks.size(), 50u);
  EXPECT_TRUE(schedule_is_safe(s, 10, caps, 5));
}

TEST(Wavefront, ZeroCapsEmptySchedule) {
  std::vector<int> caps(4, 0);
  auto s = wavefront_schedule(4, caps, 3);
  EXPECT_TRUE(s.tasks.empty());
}

TEST(Wavefront, ReuseWindowIsBounded) {
  // uniform caps: consecutive touches of one group are at most p_m+1
  // schedule positions apart
  for (int p_m : {2, 3, 5}) {
    std::vector<int> caps(12, p_m);
    auto s = wavefront_schedule(12, caps, p_m);
    std::vector<int> last(12, -1);
    for (int i = 0; i < static_cast<int>(s.tasks.size()); ++i) {
      const index_t g = s.tasks[i].group;
      if (last[g] >= 0) EXPECT_LE(i - last[g], p_m + 1);
      last[g] = i;
    }
  }
}

TEST(Wavefront, MixedCapsStaySafe) {
  std::vector<int> caps{1, 2, 3, 3, 3, 2};
  auto s = wavefront_schedule(6, caps, 3);
  std::size_t total = 0;
  for (int c : caps) total += c;
  EXPECT_EQ(s.tasks.size(), total);
  EXPECT_TRUE(schedule_is_safe(s, 6, caps, 3));
}

TEST(Wavefront, ValidatorCatchesReordering) {
  std::vector<int> caps{2, 2};
  auto s = wavefront_schedule(2, caps, 2);
  ASSERT_TRUE(schedule_is_safe(s, 2, caps, 2));
  std::swap(s.tasks[0], s.tasks[2]);
  EXPECT_FALSE(schedule_is_safe(s, 2, caps, 2));
}
