#include "apm/inference.hpp"
#include "apm/sim.hpp"
#include "unit/common.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace apm {
namespace {

using testing::code_of;
using testing::col;
using testing::vec;

TEST(DrawWeights, SingleUnitAndNormalisation) {
  std::mt19937_64 rng(3);
  EXPECT_EQ(draw_weights(1, rng)(0), 1.0);
  const Vector w = draw_weights(50, rng);
  EXPECT_NEAR(w.sum(), 1.0, 1e-12);
  EXPECT_TRUE((w.array() > 0.0).all());
}

TEST(DrawWeights, DeterministicAndMeanOneOverN) {
  std::mt19937_64 a(11);
  std::mt19937_64 b(11);
  EXPECT_EQ(draw_weights(20, a), draw_weights(20, b));
  // E[w_i] = 1/n; average over many draws.
  std::mt19937_64 rng(5);
  Vector acc = Vector::Zero(4);
  for (int k = 0; k < 20000; ++k) acc += draw_weights(4, rng);
  acc /= 20000.0;
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(acc(i), 0.25, 0.01);
}

TEST(ReplicateSeed, DistinctStreams) {
  EXPECT_EQ(replicate_seed(7, 3), replicate_seed(7, 3));
  EXPECT_NE(replicate_seed(7, 3), replicate_seed(7, 4));
  EXPECT_NE(replicate_seed(7, 3), replicate_seed(8, 3));
}

TEST(Quantile, LinearInterpolation) {
  const std::vector<double> x{4.0, 1.0, 3.0, 2.0};
  EXPECT_DOUBLE_EQ(quantile(x, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile(x, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile(x, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(x, 1.0), 4.0);
}

TEST(IqrSe, NormalQuartilesGiveOne) {
  const std::vector<double> x{-kNormalIqr, kNormalIqr};
  EXPECT_NEAR(iqr_se(x), 1.0, 1e-12);
  const std::vector<double> scaled{-3.0 * kNormalIqr, 3.0 * kNormalIqr};
  EXPECT_NEAR(iqr_se(scaled), 3.0, 1e-12);
}

TEST(IqrSe, RobustToOutliers) {
  std::vector<double> x;
  for (int k = 0; k < 101; ++k) x.push_back(k / 100.0);
  const double before = iqr_se(x);
  x.back() = 1e9;
  EXPECT_DOUBLE_EQ(iqr_se(x), before);
}

TEST(IqrSe, ZeroSpread) {
  const std::vector<double> x{1.0, 2.0, 2.0, 2.0, 2.0, 3.0};
  EXPECT_EQ(code_of([&] { iqr_se(x); }), ErrorCode::ZeroSpread);
}

TEST(CriticalValue, StandardNormalSingleParameter) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix reps(2000, 1);
  for (int m = 0; m < 2000; ++m) reps(m, 0) = z(rng);
  EXPECT_NEAR(critical_value(reps, vec({0.0}), vec({1.0}), 0.05), 1.959964, 0.15);
}

TEST(CriticalValue, AllEqualAndConstantCoordinate) {
  EXPECT_EQ(critical_value(Matrix::Constant(10, 1, 2.0), vec({2.0}), vec({1.0}), 0.05), 0.0);

  Matrix reps(5, 2);
  reps << 0.1, 1.0, -0.4, 1.0, 0.2, 1.0, 0.3, 1.0, -0.1, 1.0;
  const double joint = critical_value(reps, vec({0.0, 1.0}), vec({1.0, 1e-300}), 0.2);
  const double alone =
      critical_value(reps.leftCols(1), vec({0.0}), vec({1.0}), 0.2);
  EXPECT_EQ(joint, alone);
}

TEST(CriticalValue, LiteralModeUsesRawReplicates) {
  const Matrix reps = col({5.0, 5.0, 5.0});
  EXPECT_EQ(critical_value(reps, vec({5.0}), vec({1.0}), 0.1, true), 0.0);
  EXPECT_EQ(critical_value(reps, vec({5.0}), vec({1.0}), 0.1, false), 5.0);
}

TEST(SummarizeReplicates, DegenerateColumnIsFloored) {
  Matrix reps(4, 2);
  reps << 1.0, 3.0, 2.0, 3.0, 3.0, 3.0, 4.0, 3.0;
  const BootstrapResult r = summarize_replicates(vec({2.5, 3.0}), reps, 0.05, true);
  EXPECT_FALSE(r.degenerate[0]);
  EXPECT_TRUE(r.degenerate[1]);
  EXPECT_GT(r.sigma_hat(1), 0.0);
  EXPECT_LE(r.sigma_hat(1), 1e-11);
  EXPECT_EQ(r.warnings.size(), 1u);
  EXPECT_NEAR(r.intervals(1, 1) - r.intervals(1, 0), 0.0, 1e-9);
}

TEST(SummarizeReplicates, ShiftEquivariance) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z(0.0, 1.0);
  Matrix reps(200, 2);
  for (int m = 0; m < 200; ++m) reps.row(m) << z(rng), 2.0 * z(rng);
  const Vector theta = vec({0.1, -0.2});
  const BootstrapResult a = summarize_replicates(theta, reps, 0.1, true);
  const Vector shift = vec({10.0, -3.0});
  const BootstrapResult b =
      summarize_replicates(theta + shift, reps.rowwise() + shift.transpose(), 0.1, true);
  EXPECT_NEAR(a.q_crit, b.q_crit, 1e-9);
  for (int j = 0; j < 2; ++j) {
    EXPECT_NEAR(b.intervals(j, 0), a.intervals(j, 0) + shift(j), 1e-9);
    EXPECT_NEAR(b.intervals(j, 1), a.intervals(j, 1) + shift(j), 1e-9);
  }
}

class BootstrapTest : public ::testing::Test {
 protected:
  static Panel make_panel(double scale = 1.0) {
    const DgpTruth truth = testing::make_truth(col({1.0, 0.8, 1.2, 0.6}),
                                               {{0, 1}, {1, 2}, {2, 3}},
                                               {vec({1.0}), vec({1.5}), vec({2.0})}, 0.25);
    const Panel p = generate(truth, 600, 21);
    return Panel(p.unit_ids(), p.outcome_ids(), scale * p.values(), p.observed());
  }

  static BootstrapResult run(const Panel& panel, int threads, double alpha = 0.05) {
    BootstrapOptions opt;
    opt.replicates = 60;
    opt.seed = 123;
    opt.threads = threads;
    opt.alpha = alpha;
    return bootstrap(panel, EstimatorConfig{}, CellsSpec{{{0, 3}, {2, 0}}}, opt);
  }
};

TEST_F(BootstrapTest, DeterministicAcrossRunsAndThreads) {
  const Panel panel = make_panel();
  const BootstrapResult a = run(panel, 1);
  const BootstrapResult b = run(panel, 1);
  const BootstrapResult c = run(panel, 3);
  EXPECT_EQ(a.replicates, b.replicates);
  EXPECT_EQ(a.replicates, c.replicates);
  EXPECT_EQ(a.intervals, c.intervals);
  EXPECT_EQ(a.failed_replicates, 0);
  EXPECT_EQ(a.replicates.rows(), 60);
}

TEST_F(BootstrapTest, IntervalsCoverPointEstimateAndWidenWithConfidence) {
  const Panel panel = make_panel();
  const BootstrapResult narrow = run(panel, 1, 0.2);
  const BootstrapResult wide = run(panel, 1, 0.05);
  EXPECT_LE(narrow.q_crit, wide.q_crit);
  for (int j = 0; j < 2; ++j) {
    EXPECT_LT(wide.intervals(j, 0), wide.theta_hat(j));
    EXPECT_GT(wide.intervals(j, 1), wide.theta_hat(j));
    EXPECT_GT(wide.sigma_hat(j), 0.0);
  }
}

TEST_F(BootstrapTest, ScaleEquivariance) {
  const BootstrapResult a = run(make_panel(), 1);
  const BootstrapResult b = run(make_panel(2.0), 1);
  EXPECT_NEAR(b.q_crit, a.q_crit, 1e-8);
  for (int j = 0; j < 2; ++j) {
    EXPECT_NEAR(b.theta_hat(j), 2.0 * a.theta_hat(j), 1e-10);
    EXPECT_NEAR(b.sigma_hat(j), 2.0 * a.sigma_hat(j), 1e-9);
  }
}

TEST_F(BootstrapTest, RejectsBadOptions) {
  const Panel panel = make_panel();
  BootstrapOptions opt;
  opt.replicates = 1;
  EXPECT_EQ(code_of([&] { bootstrap(panel, {}, CellsSpec{{{0, 3}}}, opt); }),
            ErrorCode::InvalidArgument);
  opt.replicates = 10;
  opt.alpha = 1.0;
  EXPECT_EQ(code_of([&] { bootstrap(panel, {}, CellsSpec{{{0, 3}}}, opt); }),
            ErrorCode::InvalidArgument);
  opt.alpha = 0.05;
  EXPECT_EQ(code_of([&] { bootstrap(panel, {}, CellsSpec{{{9, 3}}}, opt); }),
            ErrorCode::InvalidArgument);
}

}  // namespace
}  // namespace apm
