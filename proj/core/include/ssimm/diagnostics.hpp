#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ssimm {

struct CheckResult {
  std::string name;
  int cases = 0;
  double worst = 0.0;      // largest error seen
  double tolerance = 0.0;
  bool passed = false;
};

/// Central-difference checks of the reconstruction, embedding and kernel
/// reconstruction gradients at seeded random points. Error is
/// |g - g_fd| / max(|g_fd|, 1e-8) in the 2-norm.
std::vector<CheckResult> check_gradients(std::uint64_t seed, int cases = 50, double step = 1e-6, double tolerance = 1e-5);

/// Projection feasibility (column sums, scaled orthonormality) and idempotence.
CheckResult check_projection(std::uint64_t seed, int cases = 100);

/// Everything above; the `verify` command fails when any result fails.
std::vector<CheckResult> run_verification(std::uint64_t seed);

}  // namespace ssimm
