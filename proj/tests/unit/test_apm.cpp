#include "apm/apm.hpp"
#include "unit/common.hpp"

#include <Eigen/Dense>

#include <random>

namespace apm {
namespace {

using testing::code_of;
using testing::col;

CohortProjection exact(const Matrix& gamma, const IndexSet& observed, int cohort = 0) {
  const int t = static_cast<int>(gamma.rows());
  return {projector(selector(observed, t) * gamma), observed, cohort};
}

TEST(Projector, AxisVector) {
  Matrix expected = Matrix::Zero(3, 3);
  expected(0, 0) = 1.0;
  EXPECT_LT((projector(col({1.0, 0.0, 0.0})) - expected).norm(), 1e-15);
}

TEST(Projector, ZeroMatrix) { EXPECT_EQ(projector(Matrix::Zero(3, 2)), Matrix::Zero(3, 3)); }

TEST(Projector, OuterProductOverNorm) {
  Matrix expected(3, 3);
  expected << 0.5, 0.5, 0.0, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0;
  EXPECT_LT((projector(col({1.0, 1.0, 0.0})) - expected).norm(), 1e-15);
}

TEST(Projector, SymmetricIdempotentWithNumericalRank) {
  std::mt19937_64 rng(2);
  Matrix m = testing::random_matrix(6, 3, rng);
  m.col(2) = m.col(0) - 2.0 * m.col(1);  // rank 2
  const Matrix p = projector(m);
  EXPECT_LT((p - p.transpose()).norm(), 1e-12);
  EXPECT_LT((p * p - p).norm(), 1e-10);
  EXPECT_NEAR(p.trace(), 2.0, 1e-10);
}

TEST(BuildApm, TwoCohortChain) {
  const Matrix g = col({1.0, 1.0, 1.0});
  const std::vector<CohortProjection> parts{exact(g, {0, 1}, 0), exact(g, {1, 2}, 1)};
  const AggregatedProjection a = build_apm(parts, 3);
  Matrix expected(3, 3);
  expected << 0.5, -0.5, 0.0, -0.5, 1.0, -0.5, 0.0, -0.5, 0.5;
  EXPECT_LT((a.matrix - expected).norm(), 1e-14);
  // Independent eigensolve of the expected matrix.
  const Eigen::SelfAdjointEigenSolver<Matrix> oracle(expected);
  EXPECT_LT((a.spectrum - oracle.eigenvalues()).norm(), 1e-12);
  EXPECT_NEAR(a.spectrum(0), 0.0, 1e-12);
  EXPECT_NEAR(a.spectrum(1), 0.5, 1e-12);
  EXPECT_NEAR(a.spectrum(2), 1.5, 1e-12);
  EXPECT_NEAR(a.eigengap(1), 0.5, 1e-12);
  EXPECT_EQ(a.contributing_cohorts, (std::vector<int>{0, 1}));
}

TEST(BuildApm, FullCohortGivesComplementProjector) {
  std::mt19937_64 rng(3);
  const Matrix g = testing::random_matrix(4, 2, rng);
  const std::vector<CohortProjection> parts{exact(g, {0, 1, 2, 3})};
  const AggregatedProjection a = build_apm(parts, 4);
  EXPECT_LT((a.matrix - (Matrix::Identity(4, 4) - projector(g))).norm(), 1e-12);
}

TEST(BuildApm, ExactlyDeterminedCohortsVanish) {
  const std::vector<CohortProjection> parts{{selector({0}, 3), {0}, 0},
                                            {selector({1}, 3), {1}, 1},
                                            {selector({2}, 3), {2}, 2}};
  EXPECT_EQ(build_apm(parts, 3).matrix, Matrix::Zero(3, 3));
}

TEST(BuildApm, Errors) {
  const std::vector<CohortProjection> bad{{Matrix::Identity(2, 2), {0, 1}, 0}};
  EXPECT_EQ(code_of([&] { build_apm(bad, 3); }), ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([&] { build_apm({}, 3); }), ErrorCode::InvalidArgument);
}

TEST(BuildApm, PositiveSemidefiniteFromExactProjectors) {
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix g = testing::random_matrix(6, 2, rng);
    const std::vector<CohortProjection> parts{exact(g, {0, 1, 2}), exact(g, {2, 3, 4}),
                                              exact(g, {1, 4, 5}), exact(g, {0, 5})};
    const AggregatedProjection a = build_apm(parts, 6);
    EXPECT_GE(a.spectrum(0), -1e-10);
    EXPECT_LT((a.matrix * g).norm(), 1e-10);
  }
}

TEST(NullBasis, ChainExample) {
  const Matrix g = col({1.0, 1.0, 1.0});
  const std::vector<CohortProjection> parts{exact(g, {0, 1}), exact(g, {1, 2})};
  const FactorBasis b = null_basis(build_apm(parts, 3), 1);
  EXPECT_LT((b.gamma * b.gamma.transpose() - Matrix::Constant(3, 3, 1.0 / 3.0)).norm(), 1e-12);
  EXPECT_NEAR(b.eigengap, 0.5, 1e-12);
  EXPECT_FALSE(b.weak_identification);
  EXPECT_FALSE(b.rank_mismatch);
  EXPECT_TRUE(b.warnings.empty());
}

AggregatedProjection from_matrix(const Matrix& m) {
  AggregatedProjection a;
  a.matrix = m;
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  a.spectrum = eig.eigenvalues();
  a.eigenvectors = eig.eigenvectors();
  return a;
}

TEST(NullBasis, DiagonalTwoDimensionalNullSpace) {
  const FactorBasis b = null_basis(from_matrix(testing::vec({0.0, 0.0, 5.0}).asDiagonal()), 2);
  Matrix expected = Matrix::Zero(3, 3);
  expected(0, 0) = expected(1, 1) = 1.0;
  EXPECT_LT((b.gamma * b.gamma.transpose() - expected).norm(), 1e-14);
  EXPECT_DOUBLE_EQ(b.eigengap, 5.0);
}

TEST(NullBasis, ZeroMatrixWarns) {
  const FactorBasis b = null_basis(from_matrix(Matrix::Zero(3, 3)), 1);
  EXPECT_TRUE(b.weak_identification);
  EXPECT_EQ(b.eigengap, 0.0);
  EXPECT_FALSE(b.warnings.empty());
}

TEST(NullBasis, TooLargeNullSpaceIsFlaggedAsWeak) {
  // Disconnected staircase: {0,1} and {2,3} with Γ = 1 leave a 2-d null space.
  const Matrix g = col({1.0, 1.0, 1.0, 1.0});
  const std::vector<CohortProjection> parts{exact(g, {0, 1}), exact(g, {2, 3})};
  const AggregatedProjection a = build_apm(parts, 4);
  EXPECT_NEAR(a.spectrum(1), 0.0, 1e-12);
  EXPECT_TRUE(null_basis(a, 1).weak_identification);
}

TEST(NullBasis, RankMustBeBelowT) {
  EXPECT_EQ(code_of([] { null_basis(from_matrix(Matrix::Zero(2, 2)), 2); }), ErrorCode::BadRank);
}

}  // namespace
}  // namespace apm
