#include "ssimm/error.hpp"
#include "ssimm/ssim.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace ssimm;

namespace {

Eigen::VectorXd zero_mean(std::mt19937_64& rng, Eigen::Index q, double scale = 0.2) {
  std::normal_distribution<double> n;
  Eigen::VectorXd v(q);
  for (auto& x : v) x = scale * n(rng);
  v.array() -= v.mean();
  return v;
}

// Reference SSIM written out term by term with scalar loops.
double ssim_reference(const std::vector<double>& a, const std::vector<double>& b, double l) {
  const double q = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= q;
  mb /= q;
  double va = 0, vb = 0, cov = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
    cov += (a[i] - ma) * (b[i] - mb);
  }
  va /= q - 1;
  vb /= q - 1;
  cov /= q - 1;
  const double c1 = (0.01 * l) * (0.01 * l), c2 = (0.03 * l) * (0.03 * l), c3 = c2 / 2;
  const double sa = std::sqrt(va), sb = std::sqrt(vb);
  const double lum = (2 * ma * mb + c1) / (ma * ma + mb * mb + c1);
  const double con = (2 * sa * sb + c2) / (va + vb + c2);
  const double str = (cov + c3) / (sa * sb + c3);
  return lum * con * str;
}

}  // namespace

TEST(SsimConstants, StandardValues) {
  const auto c = SsimConstants::for_block(64);
  EXPECT_DOUBLE_EQ(c.c1, 1e-4);
  EXPECT_DOUBLE_EQ(c.c2, 9e-4);
  EXPECT_DOUBLE_EQ(c.c3, 4.5e-4);
  EXPECT_EQ(c.c3, c.c2 / 2);
  EXPECT_DOUBLE_EQ(c.c, 63 * 9e-4);
  EXPECT_THROW(SsimConstants::for_block(1), InvalidParameter);
  EXPECT_THROW(SsimConstants::for_block(4, 0.0), InvalidParameter);
}

TEST(SsimFull, IdenticalIsOne) {
  std::mt19937_64 rng(1);
  const Eigen::VectorXd x = zero_mean(rng, 16).array() + 0.5;
  EXPECT_NEAR(ssim_full(x, x, SsimConstants::for_block(16)), 1.0, 1e-15);
}

TEST(SsimFull, MatchesScalarEvaluation) {
  const Eigen::Vector4d a(0.1, 0.2, 0.3, 0.4), b(0.4, 0.3, 0.2, 0.1);
  const double expected = ssim_reference({0.1, 0.2, 0.3, 0.4}, {0.4, 0.3, 0.2, 0.1}, 1.0);
  EXPECT_NEAR(ssim_full(a, b, SsimConstants::for_block(4)), expected, 1e-14);
  EXPECT_LT(expected, 0.0);  // anti-correlated ramps
}

TEST(SsimDistance, WorkedExample) {
  const Eigen::Vector2d a(1, -1), b(2, -2);
  const double d = ssim_distance(a, b, SsimConstants::for_block(2));
  EXPECT_NEAR(d, 2.0 / 10.0009, 1e-15);
  EXPECT_NEAR(d, 0.199982, 1e-6);
}

TEST(SsimDistance, IdentitySymmetryAndBounds) {
  std::mt19937_64 rng(2);
  const auto consts = SsimConstants::for_block(16);
  for (int t = 0; t < 200; ++t) {
    const auto a = zero_mean(rng, 16, t % 2 ? 1.0 : 0.01);
    const auto b = zero_mean(rng, 16, t % 3 ? 0.1 : 2.0);
    EXPECT_EQ(ssim_distance(a, a, consts), 0.0);
    EXPECT_EQ(ssim_distance(a, b, consts), ssim_distance(b, a, consts));
    const double d = ssim_distance(a, b, consts);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 2.0);
    EXPECT_LE(ssim_distance(a, -a, consts), 2.0);
    // Simplified form 1 - (2 x1'x2 + c) / (|x1|^2 + |x2|^2 + c).
    const double simplified = 1.0 - (2 * a.dot(b) + consts.c) / (a.squaredNorm() + b.squaredNorm() + consts.c);
    EXPECT_NEAR(d, simplified, 1e-15);
  }
}

TEST(SsimDistance, EqualsOneMinusFullSsimForZeroMean) {
  std::mt19937_64 rng(3);
  for (Eigen::Index q : {2, 5, 16, 64}) {
    const auto consts = SsimConstants::for_block(static_cast<std::size_t>(q));
    for (int t = 0; t < 100; ++t) {
      const auto a = zero_mean(rng, q);
      const auto b = zero_mean(rng, q);
      EXPECT_NEAR(ssim_full(a, b, consts), 1.0 - ssim_distance(a, b, consts), 1e-12);
    }
  }
}

TEST(SsimDistance, RejectsNonZeroMean) {
  const auto consts = SsimConstants::for_block(2);
  EXPECT_THROW(ssim_distance(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 0), consts), PreconditionViolation);
  EXPECT_NO_THROW(ssim_distance(Eigen::Vector2d(1, -1 + 1e-12), Eigen::Vector2d(0, 0), consts));
}

TEST(SsimDistance, NearZeroBlocks) {
  const auto consts = SsimConstants::for_block(2);
  EXPECT_NEAR(ssim_distance(Eigen::Vector2d(1e-17, -1e-17), Eigen::Vector2d(0, 0), consts), 0.0, 1e-12);
}

TEST(SsimDistance, Unchecked) {
  EXPECT_NEAR(ssim_distance_unchecked(Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(0, 0, 0), 1.0), 3.0 / 4.0, 1e-15);
}
