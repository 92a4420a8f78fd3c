#include <gtest/gtest.h>

#include "mpk/perf_model.hpp"
#include "test_util.hpp"

using namespace mpk;

TEST(Roofline, PublishedBandwidthPoints) {
  // hand-derived: 241e9 / (6 + 14/73.7) and 180e9 / (6 + 14/17.7)
  EXPECT_NEAR(roofline_flops({241e9, 73.7}) / 1e9, 38.93, 38.93 * 5e-4);
  EXPECT_NEAR(roofline_flops({180e9, 17.7}) / 1e9, 26.51, 26.51 * 5e-4);
}

TEST(Roofline, DenseRowLimit) {
  const double bs = 100e9;
  EXPECT_NEAR(roofline_flops({bs, 1e12}), bs / 6.0, bs * 1e-9);
}

TEST(Roofline, MonotoneInBothInputs) {
  double prev = 0.0;
  for (double bs : {50e9, 100e9, 200e9}) {
    const double p = roofline_flops({bs, 10.0});
    EXPECT_GT(p, prev);
    prev = p;
  }
  prev = 0.0;
  for (double nnzr : {1.0, 5.0, 50.0, 500.0}) {
    const double p = roofline_flops({100e9, nnzr});
    EXPECT_GT(p, prev);
    prev = p;
  }
}

TEST(Roofline, RejectsNonPositiveInputs) {
  EXPECT_THROW(roofline_flops({0.0, 5.0}), std::invalid_argument);
  EXPECT_THROW(roofline_flops({1e9, 0.0}), std::invalid_argument);
}

TEST(Flops, Formula) {
  EXPECT_EQ(flop_count(10, 3), 60);
  EXPECT_EQ(flop_count(123, 0), 0);
  EXPECT_EQ(flop_count(28518400, 8), 456294400);
}

TEST(Lru, EverythingCachedHasOnlyCompulsoryMisses) {
  std::vector<std::int64_t> bytes{100, 200, 300};
  auto order = trad_access_order(3, 5);
  auto rep = lru_traffic(order, bytes, 1000, 5);
  EXPECT_EQ(rep.miss_bytes, 600);
  EXPECT_EQ(rep.matrix_bytes, 600);
  EXPECT_DOUBLE_EQ(rep.blocking_factor, 5.0);
}

TEST(Lru, TradWithOversizedMatrixMissesEverySweep) {
  // 10 C worth of blocks: LRU keeps nothing across a full sweep
  const std::int64_t C = 1000;
  std::vector<std::int64_t> bytes(100, C / 10);
  auto rep = lru_traffic(trad_access_order(100, 4), bytes, C, 4);
  EXPECT_EQ(rep.matrix_bytes, 10 * C);
  EXPECT_EQ(rep.miss_bytes, 4 * rep.matrix_bytes);
  EXPECT_DOUBLE_EQ(rep.blocking_factor, 1.0);
}

TEST(Lru, WavefrontWithFittingWindowIsCompulsoryOnly) {
  const int p_m = 4;
  std::vector<std::int64_t> bytes(40, 100);
  std::vector<int> caps(40, p_m);
  auto sched = wavefront_schedule(40, caps, p_m);
  // window of p_m+1 groups = 500 bytes fits
  auto rep = lru_traffic(schedule_access_order(sched), bytes, 500, p_m);
  EXPECT_EQ(rep.miss_bytes, rep.matrix_bytes);
  EXPECT_DOUBLE_EQ(rep.blocking_factor, p_m);
}

TEST(Lru, WavefrontNeverWorseThanTrad) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> nblocks(3, 30);
  std::uniform_int_distribution<std::int64_t> blocksize(10, 400);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = nblocks(rng);
    const int p_m = 1 + trial % 6;
    std::vector<std::int64_t> bytes(n);
    for (auto& b : bytes) b = blocksize(rng);
    std::vector<int> caps(n, p_m);
    const std::int64_t C = blocksize(rng) * 4;
    auto trad = lru_traffic(trad_access_order(n, p_m), bytes, C, p_m);
    auto dlb = lru_traffic(
        schedule_access_order(wavefront_schedule(n, caps, p_m)), bytes, C,
        p_m);
    EXPECT_GE(trad.miss_bytes, dlb.miss_bytes);
    EXPECT_GE(dlb.miss_bytes, dlb.matrix_bytes);  // compulsory floor
  }
}

TEST(Lru, BlockingFactorSaturatesWithCache) {
  const int p_m = 3;
  std::vector<std::int64_t> bytes(20, 50);
  std::vector<int> caps(20, p_m);
  auto order = schedule_access_order(wavefront_schedule(20, caps, p_m));
  double prev = 0.0;
  for (std::int64_t C : {60ll, 120ll, 200ll, 400ll, 2000ll}) {
    auto rep = lru_traffic(order, bytes, C, p_m);
    EXPECT_GE(rep.blocking_factor + 1e-12, prev);
    EXPECT_LE(rep.blocking_factor, p_m + 1e-12);
    prev = rep.blocking_factor;
  }
  auto rep = lru_traffic(order, bytes, 2000, p_m);
  EXPECT_DOUBLE_EQ(rep.blocking_factor, p_m);
}

TEST(Lru, RejectsNonPositiveCache) {
  std::vector<std::int64_t> bytes{10};
  std::vector<index_t> order{0};
  EXPECT_THROW(lru_traffic(order, bytes, 0, 1), std::invalid_argument);
}

TEST(Efficiency, IdealStrongScaling) {
  std::map<int, double> times{{1, 8.0}, {2, 4.0}, {4, 2.0}};
  auto rep = scaling_efficiency(times, ScalingMode::Strong);
  for (double e : rep.efficiency) EXPECT_DOUBLE_EQ(e, 1.0);
}

TEST(Efficiency, IdealWeakScaling) {
  std::map<int, double> times{{1, 5.0}, {4, 5.0}, {16, 5.0}};
  auto rep = scaling_efficiency(times, ScalingMode::Weak);
  for (double e : rep.efficiency) EXPECT_DOUBLE_EQ(e, 1.0);
}

TEST(Efficiency, HalfEfficientStrongPoint) {
  std::map<int, double> times{{1, 10.0}, {4, 5.0}};
  auto rep = scaling_efficiency(times, ScalingMode::Strong);
  ASSERT_EQ(rep.ranks, (std::vector<int>{1, 4}));
  EXPECT_DOUBLE_EQ(rep.efficiency[1], 0.5);
}

TEST(Efficiency, MissingBaselineThrows) {
  std::map<int, double> times{{2, 1.0}};
  EXPECT_THROW(scaling_efficiency(times, ScalingMode::Strong),
               std::invalid_argument);
}
