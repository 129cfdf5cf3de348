#pragma once

#include <Eigen/Core>

#include <cstddef>

namespace ssimm {

/// SSIM stabilizers for dynamic range l and block length q.
/// c1 = (0.01 l)^2, c2 = (0.03 l)^2, c3 = c2 / 2 and the zero-mean
/// stabilizer c = (q - 1) c2.
struct SsimConstants {
  double dynamic_range = 1.0;
  std::size_t block_length = 0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double c = 0.0;

  /// Throws InvalidParameter when q < 2 or l <= 0.
  static SsimConstants for_block(std::size_t block_length, double dynamic_range = 1.0);
};

/// Full SSIM (luminance x contrast x structure) with sample statistics over q - 1.
double ssim_full(const Eigen::Ref<const Eigen::VectorXd>& x1, const Eigen::Ref<const Eigen::VectorXd>& x2,
                 const SsimConstants& consts);

/// Squared SSIM distance between zero-mean blocks:
///   ||x1 - x2||^2 / (||x1||^2 + ||x2||^2 + c)  ==  1 - SSIM(x1, x2).
/// Throws PreconditionViolation if either input has |mean| > 1e-9.
double ssim_distance(const Eigen::Ref<const Eigen::VectorXd>& x1, const Eigen::Ref<const Eigen::VectorXd>& x2,
                     const SsimConstants& consts);

/// Same formula for vectors whose length need not match the constants' block
/// length and without the zero-mean check. Used for embedded rows.
double ssim_distance_unchecked(const Eigen::Ref<const Eigen::VectorXd>& x1,
                               const Eigen::Ref<const Eigen::VectorXd>& x2, double c);

}  // namespace ssimm
