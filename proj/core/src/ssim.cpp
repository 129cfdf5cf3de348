#include "ssimm/ssim.hpp"

#include "ssimm/error.hpp"

#include <cmath>
#include <string>

namespace ssimm {

namespace {
constexpr double kZeroMeanTolerance = 1e-9;
constexpr double kNearZeroNorm = 1e-15;
}  // namespace

SsimConstants SsimConstants::for_block(std::size_t block_length, double dynamic_range) {
  if (block_length < 2) throw InvalidParameter("SSIM needs block length q >= 2");
  if (!(dynamic_range > 0.0)) throw InvalidParameter("SSIM dynamic range must be positive");
  SsimConstants k;
  k.dynamic_range = dynamic_range;
  k.block_length = block_length;
  k.c1 = (0.01 * dynamic_range) * (0.01 * dynamic_range);
  k.c2 = (0.03 * dynamic_range) * (0.03 * dynamic_range);
  k.c3 = k.c2 / 2.0;
  k.c = static_cast<double>(block_length - 1) * k.c2;
  return k;
}

double ssim_full(const Eigen::Ref<const Eigen::VectorXd>& x1, const Eigen::Ref<const Eigen::VectorXd>& x2,
                 const SsimConstants& consts) {
  const auto q = x1.size();
  if (q < 2) throw InvalidParameter("ssim_full: q must be at least 2");
  if (x2.size() != q) throw InvalidInput("ssim_full: length mismatch");

  const double mu1 = x1.mean();
  const double mu2 = x2.mean();
  const Eigen::ArrayXd d1 = x1.array() - mu1;
  const Eigen::ArrayXd d2 = x2.array() - mu2;
  const double dof = static_cast<double>(q - 1);
  const double var1 = d1.square().sum() / dof;
  const double var2 = d2.square().sum() / dof;
  const double cov = (d1 * d2).sum() / dof;
  const double s1 = std::sqrt(var1);
  const double s2 = std::sqrt(var2);

  const double luminance = (2.0 * mu1 * mu2 + consts.c1) / (mu1 * mu1 + mu2 * mu2 + consts.c1);
  const double contrast = (2.0 * s1 * s2 + consts.c2) / (var1 + var2 + consts.c2);
  const double structure = (cov + consts.c3) / (s1 * s2 + consts.c3);
  return luminance * contrast * structure;
}

double ssim_distance_unchecked(const Eigen::Ref<const Eigen::VectorXd>& x1,
                               const Eigen::Ref<const Eigen::VectorXd>& x2, double c) {
  const double n1 = x1.squaredNorm();
  const double n2 = x2.squaredNorm();
  if (n1 < kNearZeroNorm && n2 < kNearZeroNorm) return 0.0;
  return (x1 - x2).squaredNorm() / (n1 + n2 + c);
}

double ssim_distance(const Eigen::Ref<const Eigen::VectorXd>& x1, const Eigen::Ref<const Eigen::VectorXd>& x2,
                     const SsimConstants& consts) {
  if (x1.size() != x2.size()) throw InvalidInput("ssim_distance: length mismatch");
  if (std::abs(x1.mean()) > kZeroMeanTolerance || std::abs(x2.mean()) > kZeroMeanTolerance) {
    throw PreconditionViolation("ssim_distance: inputs must be zero-mean (means " + std::to_string(x1.mean()) +
                                ", " + std::to_string(x2.mean()) + ")");
  }
  return ssim_distance_unchecked(x1, x2, consts.c);
}

}  // namespace ssimm
