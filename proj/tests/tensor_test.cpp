#include "abduct/tensor.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include <random>

namespace abduct {
namespace {

using BigFloat = boost::multiprecision::cpp_bin_float_50;

TEST(MeanPool, SingleRowIsIdentity) {
  TokenMatrix m(1, 3);
  m << 0.25f, -4.0f, 7.5f;
  const Vector v = mean_pool(m);
  EXPECT_EQ(v(0), 0.25f);
  EXPECT_EQ(v(1), -4.0f);
  EXPECT_EQ(v(2), 7.5f);
}

TEST(MeanPool, SymmetricAverage) {
  TokenMatrix m(2, 2);
  m << 1, 3, 3, 1;
  const Vector v = mean_pool(m);
  EXPECT_EQ(v(0), 2.0f);
  EXPECT_EQ(v(1), 2.0f);
}

TEST(MeanPool, MatchesPerColumnSummation) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  Eigen::MatrixXd m(30, 8);
  for (int r = 0; r < 30; ++r)
    for (int c = 0; c < 8; ++c) m(r, c) = u(rng);

  const Eigen::VectorXd pooled = mean_pool(m);
  for (int c = 0; c < 8; ++c) {
    double s = 0.0;
    for (int r = 0; r < 30; ++r) s += m(r, c);
    EXPECT_LT(std::abs(pooled(c) - s / 30.0), 1e-9);
  }
}

TEST(MeanPool, EmptyIsDomainError) {
  TokenMatrix m(0, 4);
  EXPECT_THROW(mean_pool(m), std::domain_error);
}

TEST(MeanPool, IsLinearInScale) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd a(7, 5);
    for (int i = 0; i < a.size(); ++i) a.data()[i] = u(rng);
    const double c = 10.0 * u(rng);
    const Eigen::VectorXd lhs = mean_pool(Eigen::MatrixXd(c * a));
    const Eigen::VectorXd rhs = c * mean_pool(a);
    EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, rhs.cwiseAbs().maxCoeff()));
  }
}

TEST(Cosine, BasicCases) {
  Eigen::Vector2d e0(1, 0), e1(0, 1), neg(-1, 0);
  EXPECT_DOUBLE_EQ(cosine(e0, e1), 0.0);
  EXPECT_DOUBLE_EQ(cosine(e0, neg), -1.0);
  Eigen::Vector3f v(0.3f, -1.7f, 2.2f);
  EXPECT_DOUBLE_EQ(cosine(v, v), 1.0);
}

TEST(Cosine, ClampsToUnitInterval) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd v(17);
    for (int i = 0; i < 17; ++i) v(i) = u(rng);
    const double c = cosine(v, Eigen::VectorXd(3.0 * v));
    EXPECT_LE(c, 1.0);
    EXPECT_GE(c, -1.0);
  }
}

TEST(Cosine, Errors) {
  Eigen::Vector2d a(1, 2);
  Eigen::Vector3d b(1, 2, 3);
  EXPECT_THROW(cosine(a, b), std::domain_error);
  EXPECT_THROW(cosine(a, Eigen::Vector2d::Zero()), std::domain_error);
  EXPECT_THROW(cosine(Eigen::Vector2d::Zero(), a), std::domain_error);
}

TEST(Cosine, SymmetricBitForBit) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXf u(33), v(33);
    for (int i = 0; i < 33; ++i) {
      u(i) = static_cast<float>(g(rng));
      v(i) = static_cast<float>(g(rng));
    }
    EXPECT_EQ(cosine(u, v), cosine(v, u));
  }
}

TEST(Softmax, UniformOnEqualLogits) {
  const Eigen::VectorXd p = softmax(Eigen::Vector2d(0, 0));
  EXPECT_DOUBLE_EQ(p(0), 0.5);
  EXPECT_DOUBLE_EQ(p(1), 0.5);
}

TEST(Softmax, LargeLogitsMatchExtendedPrecision) {
  const Eigen::VectorXd p = softmax(Eigen::Vector2d(1000, 0));
  ASSERT_TRUE(p.allFinite());
  const BigFloat e = boost::multiprecision::exp(BigFloat(-1000));
  const BigFloat p0 = 1 / (1 + e);
  const BigFloat p1 = e / (1 + e);
  EXPECT_LT(std::abs(p(0) - p0.convert_to<double>()), 1e-12);
  EXPECT_LT(std::abs(p(1) - p1.convert_to<double>()), 1e-12);
}

TEST(Softmax, ShiftInvariant) {
  const Eigen::Vector2d z(0.3, -1.2);
  const Eigen::Vector2d shifted = z.array() + 41.7;
  EXPECT_LT((softmax(z) - softmax(shifted)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Softmax, RejectsNonFinite) {
  EXPECT_THROW(softmax(Eigen::Vector2d(std::numeric_limits<double>::infinity(), 0)), std::domain_error);
  EXPECT_THROW(softmax(Eigen::VectorXd(0)), std::domain_error);
}

TEST(LinearForward, ZeroWeights) {
  const Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2, 4);
  const Eigen::VectorXd z = linear_forward(w, Eigen::Vector2d(3, -1), Eigen::Vector4d(1, 2, 3, 4));
  EXPECT_EQ(z(0), 3.0);
  EXPECT_EQ(z(1), -1.0);
}

TEST(LinearForward, SelectorRows) {
  const Eigen::Matrix2d w = Eigen::Matrix2d::Identity();
  const Eigen::VectorXd z = linear_forward(w, Eigen::Vector2d::Zero(), Eigen::Vector2d(5, 7));
  EXPECT_EQ(z(0), 5.0);
  EXPECT_EQ(z(1), 7.0);
}

TEST(LinearForward, MatchesNaiveLoop) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd w(2, 16);
    Eigen::Vector2d b(u(rng), u(rng));
    Eigen::VectorXd x(16);
    for (int i = 0; i < w.size(); ++i) w.data()[i] = u(rng);
    for (int i = 0; i < 16; ++i) x(i) = u(rng);
    const Eigen::VectorXd z = linear_forward(w, b, x);
    for (int k = 0; k < 2; ++k) {
      double s = b(k);
      for (int j = 0; j < 16; ++j) s += w(k, j) * x(j);
      EXPECT_LT(std::abs(z(k) - s), 1e-10);
    }
  }
}

TEST(LinearForward, DimensionMismatch) {
  EXPECT_THROW(linear_forward(Eigen::MatrixXd::Zero(2, 3), Eigen::Vector2d::Zero(), Eigen::Vector2d(1, 1)),
               std::domain_error);
}

}  // namespace
}  // namespace abduct
