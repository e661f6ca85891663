#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "connselect/diagnostics.hpp"
#include "connselect/spd_manifold.hpp"
#include "test_support.hpp"

namespace connselect {
namespace {

using testing::random_spd;

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

TEST(Regularize, IdentityShift) {
  const SpdMatrix p = regularize(Connectome(Matrix::Identity(2, 2)), 1e-10);
  EXPECT_TRUE(p.matrix().isApprox((1.0 + 1e-10) * Matrix::Identity(2, 2), 0.0));
}

TEST(Regularize, RankOneBecomesDefinite) {
  Matrix ones = Matrix::Ones(2, 2);
  const SpdMatrix p = regularize(Connectome(ones), 1e-10);
  Eigen::SelfAdjointEigenSolver<Matrix> es(p.matrix());
  EXPECT_NEAR(es.eigenvalues()(0), 1e-10, 1e-15);
  EXPECT_NEAR(es.eigenvalues()(1), 2.0 + 1e-10, 1e-12);
}

TEST(Regularize, RejectsNonpositiveMu) {
  const Connectome c(Matrix::Identity(3, 3));
  EXPECT_THROW(regularize(c, 0.0), ValidationError);
  EXPECT_THROW(regularize(c, -1e-3), ValidationError);
}

TEST(Regularize, SmallestEigenvalueAtLeastMu) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    // rank-deficient PSD input: 3 time points, 6 regions
    const Connectome c = testing::random_correlation(6, rng, 3);
    const double mu = 1e-6;
    const SpdMatrix p = regularize(c, mu);
    Eigen::SelfAdjointEigenSolver<Matrix> es(p.matrix());
    EXPECT_GE(es.eigenvalues().minCoeff(), mu - 1e-15 - 1e-14);
  }
}

TEST(Connectome, RejectsAsymmetricAndNonSquare) {
  Matrix m = Matrix::Identity(3, 3);
  m(0, 1) = 0.5;
  EXPECT_THROW(Connectome{m}, ValidationError);
  EXPECT_THROW(Connectome{Matrix::Zero(2, 3)}, ValidationError);
  m = Matrix::Identity(2, 2);
  m(1, 1) = std::nan("");
  EXPECT_THROW(Connectome{m}, ValidationError);
}

TEST(SpdMatrix, RejectsIndefinite) {
  Matrix m(2, 2);
  m << 1, 2, 2, 1;
  EXPECT_THROW(SpdMatrix{m}, NumericalError);
}

TEST(Logm, Identity) {
  EXPECT_EQ(logm(SpdMatrix(Matrix::Identity(4, 4))).matrix().norm(), 0.0);
}

TEST(Logm, Diagonal) {
  const Matrix l = logm(SpdMatrix(diag2(std::exp(1.0), std::exp(2.0)))).matrix();
  EXPECT_NEAR((l - diag2(1.0, 2.0)).norm(), 0.0, 1e-14);
}

TEST(Logm, TwoByTwoClosedForm) {
  Matrix p(2, 2);
  p << 2, 1, 1, 2;
  const Matrix expected = 0.5 * std::log(3.0) * Matrix::Ones(2, 2);
  EXPECT_NEAR((logm(SpdMatrix(p)).matrix() - expected).norm(), 0.0, 1e-14);
}

TEST(Logm, OutputSymmetric) {
  std::mt19937_64 rng(3);
  for (const int d : {4, 16, 50}) {
    const Matrix l = logm(random_spd(d, rng, -6.0, 3.0)).matrix();
    EXPECT_LT((l - l.transpose()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Expm, ZeroAndDiagonal) {
  EXPECT_NEAR((expm(TangentMatrix(Matrix::Zero(3, 3))).matrix() - Matrix::Identity(3, 3)).norm(),
              0.0, 1e-15);
  const Matrix e = expm(TangentMatrix(diag2(1.0, 2.0))).matrix();
  EXPECT_NEAR((e - diag2(std::exp(1.0), std::exp(2.0))).norm(), 0.0, 1e-13);
}

// Round trip over a wide spectrum: eigenvalues log-uniform in [1e-6, 1e3].
TEST(Expm, InvertsLogm) {
  std::mt19937_64 rng(11);
  for (const int d : {4, 16, 116}) {
    for (int trial = 0; trial < 10; ++trial) {
      const SpdMatrix p = random_spd(d, rng, std::log(1e-6), std::log(1e3));
      const Matrix back = expm(logm(p)).matrix();
      EXPECT_LT((back - p.matrix()).norm() / p.matrix().norm(), 1e-8) << "d=" << d;
    }
  }
}

TEST(Distance, BasicValues) {
  std::mt19937_64 rng(5);
  const SpdMatrix p = random_spd(5, rng);
  const SpdMatrix q = random_spd(5, rng);
  EXPECT_EQ(le_distance(p, p), 0.0);
  EXPECT_NEAR(le_distance(SpdMatrix(Matrix::Identity(2, 2)),
                          SpdMatrix(diag2(std::exp(1.0), std::exp(1.0)))),
              std::sqrt(2.0), 1e-14);
  EXPECT_EQ(le_distance(p, q), le_distance(q, p));
}

TEST(Distance, DimensionMismatch) {
  EXPECT_THROW(le_distance(SpdMatrix(Matrix::Identity(2, 2)), SpdMatrix(Matrix::Identity(3, 3))),
               ValidationError);
}

TEST(Distance, TriangleInequality) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 50; ++trial) {
    const SpdMatrix p = random_spd(6, rng, -3, 3);
    const SpdMatrix q = random_spd(6, rng, -3, 3);
    const SpdMatrix r = random_spd(6, rng, -3, 3);
    EXPECT_LE(le_distance(p, r), le_distance(p, q) + le_distance(q, r) + 1e-9);
  }
}

TEST(Tangent, Examples) {
  std::mt19937_64 rng(23);
  const SpdMatrix p = random_spd(4, rng);
  EXPECT_EQ(tangent_at_identity(p, p).norm(), 0.0);
  const Matrix s =
      tangent_at_identity(SpdMatrix(Matrix::Identity(2, 2)),
                          SpdMatrix(diag2(std::exp(1.0), std::exp(2.0))))
          .matrix();
  EXPECT_NEAR((s - diag2(1.0, 2.0)).norm(), 0.0, 1e-14);
}

TEST(Tangent, NormIsDistanceAndAntisymmetric) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 30; ++trial) {
    const SpdMatrix p = random_spd(7, rng, -2, 2);
    const SpdMatrix q = random_spd(7, rng, -2, 2);
    const TangentMatrix pq = tangent_at_identity(p, q);
    const TangentMatrix qp = tangent_at_identity(q, p);
    EXPECT_NEAR(pq.norm(), le_distance(p, q), 1e-12);
    EXPECT_LE((pq.matrix() + qp.matrix()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Geodesic, EndpointsExact) {
  std::mt19937_64 rng(31);
  const SpdMatrix p = random_spd(5, rng);
  const SpdMatrix q = random_spd(5, rng);
  EXPECT_EQ(geodesic_point(p, q, 0.0).matrix(), p.matrix());
  EXPECT_EQ(geodesic_point(p, q, 1.0).matrix(), q.matrix());
}

TEST(Geodesic, DiagonalMidpoint) {
  const SpdMatrix mid = geodesic_point(SpdMatrix(Matrix::Identity(2, 2)),
                                       SpdMatrix(diag2(std::exp(2.0), std::exp(2.0))), 0.5);
  EXPECT_NEAR((mid.matrix() - diag2(std::exp(1.0), std::exp(1.0))).norm(), 0.0, 1e-13);
}

TEST(Geodesic, HomogeneityAndReversal) {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    const SpdMatrix p = random_spd(6, rng, -2, 2);
    const SpdMatrix q = random_spd(6, rng, -2, 2);
    const double full = le_distance(p, q);
    for (const double t : {0.1, 0.25, 0.5, 0.9}) {
      EXPECT_NEAR(le_distance(p, geodesic_point(p, q, t)), t * full, 1e-8);
      const Matrix forward = geodesic_point(p, q, t).matrix();
      const Matrix backward = geodesic_point(q, p, 1.0 - t).matrix();
      EXPECT_LT((forward - backward).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(Geodesic, RejectsOutOfRange) {
  const SpdMatrix p(Matrix::Identity(2, 2));
  EXPECT_THROW(geodesic_point(p, p, -0.1), ValidationError);
  EXPECT_THROW(geodesic_point(p, p, 1.5), ValidationError);
}

TEST(Clamp, EntriesMode) {
  Matrix m(2, 2);
  m << 1, -0.5, -0.5, 1;
  EXPECT_EQ(clamp_negative(Connectome(m), ClampMode::Entries).matrix(), Matrix::Identity(2, 2));
  Matrix pos(2, 2);
  pos << 1, 0.3, 0.3, 1;
  EXPECT_EQ(clamp_negative(Connectome(pos), ClampMode::Entries).matrix(), pos);
}

TEST(Clamp, EigenvalueMode) {
  Matrix m(2, 2);
  m << 1, -0.5, -0.5, 1;
  EXPECT_EQ(clamp_negative(Connectome(m), ClampMode::Eigenvalues).matrix(), m);

  Matrix indefinite(2, 2);
  indefinite << 1, 2, 2, 1;  // eigenvalues 3 and -1
  const Matrix clamped = clamp_negative(Connectome(indefinite), ClampMode::Eigenvalues).matrix();
  EXPECT_NEAR((clamped - 1.5 * Matrix::Ones(2, 2)).norm(), 0.0, 1e-14);
  EXPECT_EQ(clamped, clamped.transpose());
}

TEST(CorrelationIssues, ReportsEachViolation) {
  std::mt19937_64 rng(41);
  EXPECT_TRUE(correlation_issues(testing::random_correlation(5, rng)).empty());

  Matrix m = Matrix::Identity(3, 3);
  m(0, 1) = m(1, 0) = 1.2;
  const auto issues = correlation_issues(Connectome(m));
  ASSERT_FALSE(issues.empty());
  EXPECT_NE(issues.front().find("correlation range"), std::string::npos);

  Matrix diag = Matrix::Identity(3, 3);
  diag(2, 2) = 2.0;
  EXPECT_FALSE(correlation_issues(Connectome(diag)).empty());
}

TEST(LogCache, MatchesDirectComputation) {
  std::mt19937_64 rng(43);
  std::vector<SpdMatrix> points;
  for (int i = 0; i < 5; ++i) points.push_back(random_spd(4, rng));
  const LogCache cache(points);
  ASSERT_EQ(cache.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      EXPECT_EQ(cache.tangent(i, j).matrix(), tangent_at_identity(points[i], points[j]).matrix());
      EXPECT_NEAR(cache.distance(i, j), le_distance(points[i], points[j]), 1e-13);
    }
  }
}

}  // namespace
}  // namespace connselect
