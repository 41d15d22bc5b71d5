#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ksmi/gaussmodel.hpp"
#include "ksmi/neural_mi.hpp"
#include "support/gradient_check.hpp"

namespace ksmi {
namespace {

PairedSamples gaussian_pair(double rho, std::size_t n, std::uint64_t seed) {
  const Matrix one = Matrix::Identity(1, 1);
  RngStream rng = RngStream::derive(seed, "neural_test", 0);
  return sample_joint(GaussianJoint(one, one, rho * one), n, rng);
}

TEST(NetForward, ZeroNetIsZero) {
  const ReluNet net = ReluNet::zeros(3, 5);
  Vector z(3);
  z << 1.0, -2.0, 7.5;
  EXPECT_EQ(net_forward(net, z), 0.0);
}

TEST(NetForward, ReluKillsNegativeInput) {
  ReluNet net = ReluNet::zeros(2, 1);
  net.beta(0) = 1.0;
  net.layers[0].weights(0, 0) = 1.0;
  Vector z(2);
  z << -2.0, 4.0;
  EXPECT_EQ(net_forward(net, z), 0.0);
  z(0) = 2.0;
  EXPECT_EQ(net_forward(net, z), 2.0);
}

TEST(NetForward, WidthMismatchThrows) {
  EXPECT_THROW(net_forward(ReluNet::zeros(2, 3), Vector::Zero(3)),
               std::invalid_argument);
}

TEST(NetForward, DirectionalFiniteDifference) {
  // g is piecewise linear in z; the FD slope equals the analytic one away
  // from kinks.
  RngStream rng(1, 0);
  const ReluNet net = ReluNet::random(3, 8, 1, rng);
  for (int t = 0; t < 10; ++t) {
    Vector z(3), dir(3);
    for (int i = 0; i < 3; ++i) {
      z(i) = rng.normal();
      dir(i) = rng.normal();
    }
    const Vector pre = net.layers[0].weights * z + net.layers[0].bias;
    double slope = net.skip_weights.dot(dir);
    for (Eigen::Index i = 0; i < pre.size(); ++i) {
      if (pre(i) > 0.0) slope += net.beta(i) * net.layers[0].weights.row(i).dot(dir);
    }
    const double h = 1e-7;
    const double fd = (net_forward(net, z + h * dir) - net_forward(net, z - h * dir)) / (2 * h);
    EXPECT_NEAR(fd, slope, 1e-6);
  }
}

TEST(DvValue, ZeroAndConstantNets) {
  RngStream rng(2, 0);
  const Matrix pos = sample_gaussian_matrix(10, 2, rng);
  const Matrix neg = sample_gaussian_matrix(12, 2, rng);
  ReluNet net = ReluNet::zeros(2, 4);
  EXPECT_EQ(dv_value(net, pos, neg), 0.0);
  net.skip_bias = 3.7;
  EXPECT_NEAR(dv_value(net, pos, neg), 0.0, 1e-12);
}

TEST(DvValue, DirectArithmetic) {
  ReluNet net = ReluNet::zeros(1, 1);
  net.skip_weights(0) = 2.0;
  net.skip_bias = 0.5;
  Matrix pos(2, 1), neg(3, 1);
  pos << 1.0, 3.0;
  neg << 0.0, -1.0, 2.0;
  // pos mean of g: 0.5 + 2*2 = 4.5
  const double want = 4.5 - std::log((std::exp(0.5) + std::exp(-1.5) + std::exp(4.5)) / 3.0);
  EXPECT_NEAR(dv_value(net, pos, neg), want, 1e-12);
}

TEST(DvValue, ShiftInvariantInSkipBias) {
  RngStream rng(3, 0);
  ReluNet net = ReluNet::random(2, 6, 1, rng);
  const Matrix pos = sample_gaussian_matrix(20, 2, rng);
  const Matrix neg = sample_gaussian_matrix(20, 2, rng);
  const double base = dv_value(net, pos, neg);
  for (double c : {-5.0, 0.1, 40.0}) {
    ReluNet shifted = net;
    shifted.skip_bias += c;
    EXPECT_NEAR(dv_value(shifted, pos, neg), base, 1e-12);
  }
}

TEST(DvValue, LargeOutputsStayFinite) {
  ReluNet net = ReluNet::zeros(1, 1);
  net.skip_weights(0) = 1000.0;
  Matrix pos(1, 1), neg(2, 1);
  pos << 1.0;
  neg << 1.0, 2.0;
  EXPECT_TRUE(std::isfinite(dv_value(net, pos, neg)));
}

TEST(NetGradient, ZeroNetSkipGradientIsMeanDifference) {
  RngStream rng(4, 0);
  const Matrix pos = sample_gaussian_matrix(15, 3, rng);
  const Matrix neg = sample_gaussian_matrix(9, 3, rng);
  const ReluNet grad = net_gradient(ReluNet::zeros(3, 5), pos, neg);
  const Vector want = (pos.colwise().mean() - neg.colwise().mean()).transpose();
  EXPECT_LE((grad.skip_weights - want).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(grad.skip_bias, 0.0, 1e-12);
}

TEST(NetGradient, IdenticalBatchesCancel) {
  const Matrix batch = Matrix::Constant(6, 2, 1.25);
  const ReluNet grad = net_gradient(ReluNet::zeros(2, 3), batch, batch);
  EXPECT_NEAR(grad.skip_weights.cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(NetGradient, FiniteDifferenceSuite) {
  const auto r = testing::gradient_suite(7);
  EXPECT_LT(r.max_rel_error, 1e-4);
  EXPECT_GT(r.checked, 1000u);
  EXPECT_LT(r.skipped, r.checked / 100 + 1);
}

TEST(Derangement, SmallCases) {
  EXPECT_EQ(derangement_shift(2), (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(derangement_shift(5), (std::vector<std::size_t>{1, 2, 3, 4, 0}));
  EXPECT_THROW(derangement_shift(1), std::invalid_argument);
  EXPECT_THROW(derangement_shift(0), std::invalid_argument);
}

TEST(Derangement, NoFixedPoints) {
  for (std::size_t n = 2; n <= 100; ++n) {
    const auto s = derangement_shift(n);
    std::vector<bool> hit(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      ASSERT_NE(s[i], i);
      hit[s[i]] = true;
    }
    for (bool h : hit) ASSERT_TRUE(h);
  }
}

TEST(Constraints, L1BallProjection) {
  Vector v(3);
  v << 3.0, -1.0, 0.5;
  const Vector p = project_l1_ball(v, 2.0);
  // Soft threshold at theta = 1: (2, 0, 0).
  EXPECT_NEAR(p(0), 2.0, 1e-12);
  EXPECT_NEAR(p(1), 0.0, 1e-12);
  EXPECT_NEAR(p(2), 0.0, 1e-12);
  EXPECT_TRUE(project_l1_ball(v, 10.0) == v);
}

TEST(Constraints, IdempotentAndNonExpanding) {
  RngStream rng(5, 0);
  for (int t = 0; t < 20; ++t) {
    ReluNet net = ReluNet::random(3, 16, 1, rng);
    for (Eigen::Index i = 0; i < 3; ++i) net.skip_weights(i) = 3.0 * rng.normal();
    net.skip_bias = 5.0 * rng.normal();
    const ReluNet before = net;
    const double a = 1.0 + rng.uniform();
    project_onto_constraints(net, a);
    for (Eigen::Index i = 0; i < 16; ++i) {
      EXPECT_LE(net.layers[0].weights.row(i).lpNorm<1>(), 1.0 + 1e-12);
      EXPECT_LE(net.layers[0].weights.row(i).lpNorm<1>(),
                before.layers[0].weights.row(i).lpNorm<1>() + 1e-12);
      EXPECT_LE(std::abs(net.layers[0].bias(i)), 1.0);
      EXPECT_LE(std::abs(net.beta(i)), a / 32.0 + 1e-15);
      EXPECT_LE(std::abs(net.beta(i)), std::abs(before.beta(i)));
    }
    EXPECT_LE(net.skip_weights.lpNorm<1>(), a + 1e-12);
    EXPECT_LE(std::abs(net.skip_bias), a);
    ReluNet again = net;
    project_onto_constraints(again, a);
    EXPECT_LE((again.flatten() - net.flatten()).cwiseAbs().maxCoeff(), 1e-14);
  }
  ReluNet deep = ReluNet::zeros(2, 2, 2);
  EXPECT_THROW(project_onto_constraints(deep, 1.0), std::invalid_argument);
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.steps = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.constraint_projection = true;
  cfg.depth = 2;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.hidden = 10;
  EXPECT_EQ(cfg.constraint_bound(), 1.0);
  cfg.hidden = 100000;
  EXPECT_NEAR(cfg.constraint_bound(), std::log(std::log(100000.0)), 1e-12);
}

TEST(Training, Deterministic) {
  const auto s = gaussian_pair(0.5, 500, 1);
  TrainConfig cfg;
  cfg.steps = 50;
  cfg.seed = 3;
  const auto a = train_dv_mi(s, cfg);
  const auto b = train_dv_mi(s, cfg);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_TRUE(a.net.flatten() == b.net.flatten());
}

TEST(Training, IndependentPairNearZero) {
  const auto s = gaussian_pair(0.0, 4000, 2);
  TrainConfig cfg;
  cfg.hidden = 32;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    cfg.seed = seed;
    const double est = train_dv_mi(s, cfg).estimate;
    EXPECT_GE(est, -0.02);
    EXPECT_LE(est, 0.05);
  }
}

TEST(Training, ConstrainedRunRespectsConstraints) {
  const auto s = gaussian_pair(0.9, 1000, 3);
  TrainConfig cfg;
  cfg.steps = 200;
  cfg.constraint_projection = true;
  const auto r = train_dv_mi(s, cfg);
  ReluNet copy = r.net;
  project_onto_constraints(copy, cfg.constraint_bound());
  EXPECT_LE((copy.flatten() - r.net.flatten()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_TRUE(std::isfinite(r.estimate));
}

TEST(Training, CorrelatedGaussianAndCheckpoints) {
  const double truth = 0.830366;
  const auto s = gaussian_pair(0.9, 16000, 4);
  TrainConfig cfg;
  cfg.hidden = 64;
  cfg.steps = 4000;
  cfg.checkpoint_every = 100;
  cfg.seed = 4;
  const auto r = train_dv_mi(s, cfg);
  EXPECT_NEAR(r.estimate, truth, 0.08);
  ASSERT_EQ(r.checkpoints.size(), 40u);
  std::size_t rising = 0;
  for (std::size_t i = 1; i < r.checkpoints.size(); ++i) {
    rising += r.checkpoints[i] >= r.checkpoints[i - 1];
  }
  EXPECT_GE(rising, static_cast<std::size_t>(0.9 * 39));
}

TEST(Training, AveragingSwitch) {
  const auto s = gaussian_pair(0.7, 800, 5);
  TrainConfig cfg;
  cfg.steps = 200;
  cfg.hidden = 8;
  cfg.checkpoint_every = 100;
  const auto averaged = train_dv_mi(s, cfg);
  cfg.average_iterates = false;
  const auto last = train_dv_mi(s, cfg);
  EXPECT_EQ(averaged.estimate, averaged.checkpoints.back());
  EXPECT_EQ(last.estimate, last.checkpoints.back());
  EXPECT_NE(averaged.estimate, last.estimate);
}

TEST(Training, RejectsTinySamples) {
  PairedSamples s{Matrix::Zero(1, 1), Matrix::Zero(1, 1)};
  EXPECT_THROW(train_dv_mi(s, TrainConfig{}), std::invalid_argument);
}

}  // namespace
}  // namespace ksmi
