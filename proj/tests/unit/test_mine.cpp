#include <gtest/gtest.h>

#include <set>

#include "rnnbelief/mine/mine.hpp"
#include "support/synthetic.hpp"

using namespace rnnbelief;
using namespace rnnbelief::mine;

namespace {

// Smaller network than the default; enough for one-dimensional synthetic data.
MineConfig light_config() {
  MineConfig c;
  c.width = 64;
  c.epochs = 100;
  c.batch_size = 512;
  return c;
}

Dataset independent_pairs(int n, int dx, int dy, Rng& rng) {
  Dataset d;
  d.x.resize(dx, n);
  d.y.resize(dy, n);
  for (Eigen::Index i = 0; i < d.x.size(); ++i) d.x.data()[i] = standard_normal(rng);
  for (Eigen::Index i = 0; i < d.y.size(); ++i) d.y.data()[i] = standard_normal(rng);
  return d;
}

// Sets of M noisy copies of a latent scalar, x = latent.
}  // namespace

TEST(DvBound, HandComputedBatch) {
  Vector tj(2), tm(2);
  tj << 1.0, 3.0;
  tm << 0.0, 2.0;
  EXPECT_NEAR(dv_bound(tj, tm), 2.0 - std::log((1.0 + std::exp(2.0)) / 2.0), 1e-15);
  EXPECT_NEAR(dv_bound(tj, tm), 0.5662, 5e-5);
}

TEST(DvBound, ConstantStatisticIsZero) {
  for (double c : {-40.0, 0.0, 3.5, 700.0})
    EXPECT_NEAR(dv_bound(Vector::Constant(7, c), Vector::Constant(5, c)), 0.0, 1e-12 * std::max(1.0, c));
}

TEST(DvBound, LargeValuesDoNotOverflow) {
  Vector tj = Vector::Constant(3, 900.0), tm(2);
  tm << 900.0, 800.0;
  EXPECT_NEAR(dv_bound(tj, tm), -std::log((1.0 + std::exp(-100.0)) / 2.0), 1e-12);
  EXPECT_THROW(dv_bound(Vector(0), tm), ShapeError);
  EXPECT_THROW(dv_bound(Vector::Constant(1, std::nan("")), tm), NumericalError);
}

TEST(DvBound, AveragesToZeroUnderIndependence) {
  Rng rng(1);
  Dataset proto = independent_pairs(16, 2, 3, rng);
  Statistic net(proto, light_config());
  net.initialize(rng);
  double sum = 0.0;
  for (int r = 0; r < 100; ++r) {
    Dataset a = independent_pairs(256, 2, 3, rng), b = independent_pairs(256, 2, 3, rng);
    sum += dv_bound(net.evaluate(a.x, a.y, nullptr), net.evaluate(b.x, b.y, nullptr));
  }
  EXPECT_LE(std::abs(sum / 100), 0.05);
}

TEST(MakeMarginal, TwoSamplesReachAllFourPairings) {
  Rng rng(2);
  std::set<std::pair<int, int>> seen;
  for (int i = 0; i < 200; ++i) {
    MarginalPairing p = make_marginal(2, rng);
    seen.insert({p.x_index[0], p.y_index[0]});
  }
  EXPECT_EQ(seen.size(), 4u);
  EXPECT_THROW(make_marginal(1, rng), ShapeError);
}

TEST(MakeMarginal, PreservesMultisetsAndRarelyMatches) {
  Rng rng(3);
  const int n = 50;
  double matches = 0.0;
  const int reps = 4000;
  for (int r = 0; r < reps; ++r) {
    MarginalPairing p = make_marginal(n, rng);
    std::vector<int> xs = p.x_index, ys = p.y_index;
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    for (int i = 0; i < n; ++i) ASSERT_TRUE(xs[static_cast<std::size_t>(i)] == i && ys[static_cast<std::size_t>(i)] == i);
    for (int i = 0; i < n; ++i) matches += p.x_index[static_cast<std::size_t>(i)] == p.y_index[static_cast<std::size_t>(i)];
  }
  EXPECT_NEAR(matches / (reps * n), 1.0 / n, 0.1 / n);
}

TEST(Ema, TracksRunningMeanForFrozenNet) {
  Rng rng(4);
  Dataset proto = independent_pairs(16, 1, 1, rng);
  Statistic net(proto, light_config());
  net.initialize(rng);
  EmaDenominator ema(0.01);
  EXPECT_FALSE(ema.initialized());
  EXPECT_THROW(ema.value(), Error);
  double running = 0.0;
  for (int i = 1; i <= 100; ++i) {
    Dataset b = independent_pairs(1024, 1, 1, rng);
    const double log_mean = log_mean_exp(net.evaluate(b.x, b.y, nullptr));
    ema.update(log_mean);
    EXPECT_GT(ema.value(), 0.0);
    running += (std::exp(log_mean) - running) / i;
  }
  EXPECT_LE(std::abs(ema.value() - running) / running, 0.01);
}

TEST(Ema, UpdateRuleInLinearSpace) {
  EmaDenominator ema(0.25);
  ema.update(std::log(2.0));
  EXPECT_NEAR(ema.value(), 2.0, 1e-15);
  ema.update(std::log(6.0));
  EXPECT_NEAR(ema.value(), 0.75 * 2.0 + 0.25 * 6.0, 1e-14);
}

TEST(Estimate, ZeroOutputNetworkGivesZeroBits) {
  Rng rng(5);
  Dataset d = oracle::gaussian_pairs(0.9, 500, rng);
  Statistic net(d, light_config());
  net.initialize(rng);
  net.zero_output();
  EXPECT_EQ(mine_estimate(d, net, rng), 0.0);
}

TEST(Estimate, ReorderingPairsKeepsEstimate) {
  Rng rng(6);
  Dataset d = oracle::gaussian_pairs(0.8, 4000, rng);
  Rng train(7);
  TrainResult r = mine_train(d, light_config(), train);
  std::vector<int> perm = random_permutation(rng, 4000);
  Dataset shuffled{gather(d.x, perm, 0), gather(d.y, perm, 0), 0};
  // the joint term is an exact mean over pairs; the marginal term sees a
  // different (equally distributed) shuffle
  EXPECT_NEAR(r.net.evaluate(d.x, d.y, nullptr).mean(), r.net.evaluate(shuffled.x, shuffled.y, nullptr).mean(), 1e-12);
  Rng e1(8), e2(8);
  EXPECT_NEAR(mine_estimate(d, r.net, e1), mine_estimate(shuffled, r.net, e2), 0.05);
}

TEST(Estimate, DeterministicForFixedSeed) {
  Rng rng(9);
  Dataset d = oracle::gaussian_pairs(0.5, 1000, rng);
  MineConfig c = light_config();
  c.epochs = 5;
  EXPECT_EQ(estimate_mi(d, c, 42), estimate_mi(d, c, 42));
}

TEST(Training, GaussianHalfCorrelation) {
  Rng rng(10);
  Dataset d = oracle::gaussian_pairs(0.5, 10000, rng);
  EXPECT_NEAR(estimate_mi(d, light_config(), 11), oracle::gaussian_mi_bits(0.5), 0.08);
}

TEST(Training, IndependentDataNearZero) {
  Rng rng(12);
  Dataset d = independent_pairs(10000, 2, 2, rng);
  const double est = estimate_mi(d, light_config(), 13);
  EXPECT_LE(est, 0.1);
  EXPECT_GE(est, -0.1);
}

TEST(Training, EightWayCopyReachesThreeBits) {
  Rng rng(14);
  Dataset d = oracle::discrete_copy(8, 10000, false, rng);
  const double est = estimate_mi(d, light_config(), 15);
  EXPECT_GE(est, 2.9);
  EXPECT_LE(est, 3.1);
}

TEST(Training, OneHotAndScalarLabelsAgree) {
  Rng a(16), b(16);
  Dataset scalar = oracle::discrete_copy(8, 10000, false, a);
  Dataset onehot = oracle::discrete_copy(8, 10000, true, b);
  EXPECT_EQ(scalar.x, onehot.x);
  EXPECT_NEAR(estimate_mi(scalar, light_config(), 17), estimate_mi(onehot, light_config(), 17), 0.1);
}

TEST(Training, LogsOneBoundPerEpoch) {
  Rng rng(18);
  Dataset d = oracle::gaussian_pairs(0.9, 1000, rng);
  MineConfig c = light_config();
  c.epochs = 30;
  c.batch_size = 300;  // 4 batches, the last one partial
  TrainLog log;
  estimate_mi(d, c, 19, &log);
  ASSERT_EQ(log.epoch_bound.size(), 30u);
  EXPECT_GT(log.epoch_bound.back(), log.epoch_bound.front());
}

TEST(Training, RejectsInvalidInputs) {
  Rng rng(20);
  MineConfig c = light_config();
  c.ema_rate = 0.0;
  EXPECT_THROW(mine_train(oracle::gaussian_pairs(0.5, 100, rng), c, rng), ConfigError);
  Dataset ragged = oracle::gaussian_pairs(0.5, 100, rng);
  ragged.y.conservativeResize(1, 99);
  EXPECT_THROW(mine_train(ragged, light_config(), rng), ShapeError);
}

TEST(DeepSetEstimate, InvariantToParticleOrder) {
  Rng rng(21);
  const int n = 600, m = 12;
  Dataset d = oracle::particle_sets(n, m, rng);
  MineConfig c = light_config();
  c.width = 32;
  c.epochs = 10;
  c.batch_size = 128;
  Rng train(22);
  TrainResult r = mine_train(d, c, train);
  Dataset permuted = d;
  for (int i = 0; i < n; ++i) {
    std::vector<int> p = random_permutation(rng, m);
    for (int k = 0; k < m; ++k) permuted.y.col(i * m + k) = d.y.col(i * m + p[static_cast<std::size_t>(k)]);
  }
  Rng e1(23), e2(23);
  EXPECT_NEAR(mine_estimate(d, r.net, e1), mine_estimate(permuted, r.net, e2), 1e-9);
}

TEST(DeepSetEstimate, DetectsDependenceThroughSets) {
  Rng rng(24);
  Dataset d = oracle::particle_sets(3000, 16, rng);
  MineConfig c = light_config();
  c.width = 32;
  c.epochs = 40;
  c.batch_size = 256;
  // the set mean carries x with noise variance 0.25/16: I = 0.5 log2(1 + 64) ~ 3.0 bits
  EXPECT_GT(estimate_mi(d, c, 25), 1.0);
}
