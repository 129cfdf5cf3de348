#pragma once

#include "ssimm/kernels.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>

namespace ssimm {

/// Step sizes and stopping rule for the ADMM solvers. The dual variable is
/// kept in scaled form (lambda / rho).
struct AdmmConfig {
  double rho = 0.1;
  double eta = 0.1;
  int max_iter = 2000;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  /// When a neighbor coincides with the query (zero distance up to rounding),
  /// return the one-hot weight on the first such neighbor: it is feasible and
  /// attains f = 0, a global minimum the iteration does not reliably reach.
  bool exact_copy_rule = true;

  /// rho = eta = 0.1, tol 1e-6, 2000 iterations.
  static AdmmConfig reconstruction();
  /// rho = 0.01, eta = 0.1 for kernel-space reconstruction.
  static AdmmConfig kernel_reconstruction();
  /// rho = eta = 0.01, tol 1e-5, 5000 iterations.
  static AdmmConfig embedding();

  /// Throws InvalidParameter unless rho, eta, tol > 0 and max_iter > 0.
  void validate() const;
};

/// Unit-norm reconstruction weights of one block and the final ADMM state.
struct ReconstructionWeights {
  Eigen::VectorXd w;     // gradient iterate
  Eigen::VectorXd xi;    // projected iterate, exactly unit norm; the solution
  Eigen::VectorXd dual;  // scaled dual
  int iterations_run = 0;
  double final_residual = 0.0;  // ||w - xi||
  bool converged = false;

  const Eigen::VectorXd& weights() const noexcept { return xi; }
};

/// Called after every iteration with (iteration, w, xi, dual).
using AdmmObserver =
    std::function<void(int, const Eigen::VectorXd&, const Eigen::VectorXd&, const Eigen::VectorXd&)>;

/// SSIM distance between x and X w written as a ratio of quadratics in w.
double recon_objective(const Eigen::Ref<const Eigen::VectorXd>& w, const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::MatrixXd>& X, double c);

/// 2 X'((1 - f) X w - x) / (x'x + w'X'X w + c).
Eigen::VectorXd recon_gradient(const Eigen::Ref<const Eigen::VectorXd>& w, const Eigen::Ref<const Eigen::VectorXd>& x,
                               const Eigen::Ref<const Eigen::MatrixXd>& X, double c);

/// Feature-space objective (k_xx + w'Kw - 2 w'k) / (k_xx + w'Kw + c).
double kernel_recon_objective(const Eigen::Ref<const Eigen::VectorXd>& w, const NeighborhoodKernel& nk, double c);

/// 2((1 - f) K w - k) / (k_xx + w'Kw + c).
Eigen::VectorXd kernel_recon_gradient(const Eigen::Ref<const Eigen::VectorXd>& w, const NeighborhoodKernel& nk,
                                      double c);

/// Minimizes recon_objective over the unit sphere. Each iteration takes one
/// gradient step on w, normalizes w + dual onto the sphere and updates the
/// dual. Starts from w = xi = 1/sqrt(k), dual = 0. An exact-copy neighbor
/// short-circuits the iteration (see AdmmConfig::exact_copy_rule) and reports
/// zero iterations.
/// Throws DivergenceError on a non-finite iterate.
ReconstructionWeights solve_weights(const Eigen::Ref<const Eigen::VectorXd>& x,
                                    const Eigen::Ref<const Eigen::MatrixXd>& X, double c, const AdmmConfig& config,
                                    const AdmmObserver& observer = {});

/// Kernel-space variant. Throws InvalidInput if the k x k block is not symmetric.
ReconstructionWeights solve_weights_kernel(const NeighborhoodKernel& nk, double c, const AdmmConfig& config,
                                           const AdmmObserver& observer = {});

/// Out-of-sample block reconstructed from its training neighbors. Same
/// problem as solve_weights; provided for call-site clarity.
inline ReconstructionWeights solve_weights_oos(const Eigen::Ref<const Eigen::VectorXd>& query,
                                               const Eigen::Ref<const Eigen::MatrixXd>& train_neighbors, double c,
                                               const AdmmConfig& config) {
  return solve_weights(query, train_neighbors, c, config);
}

inline ReconstructionWeights solve_weights_kernel_oos(const NeighborhoodKernel& nk, double c, const AdmmConfig& config) {
  return solve_weights_kernel(nk, c, config);
}

}  // namespace ssimm
