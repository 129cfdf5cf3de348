#pragma once

#include "ssimm/llise_reconstruct.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace ssimm {

/// Reconstruction weights of image `owner` scattered over image indices:
/// the n-vector w_j is zero except at the owner's neighbors.
struct SparseWeightRow {
  Eigen::Index owner = 0;
  std::vector<Eigen::Index> indices;
  Eigen::VectorXd weights;

  /// Dense n-vector form. Throws InvalidInput if an index is out of range or
  /// equals the owner.
  Eigen::VectorXd dense(Eigen::Index n) const;
};

/// Dense M = 1_j 1_j' + w w' - 2 1_j w' (not symmetric).
Eigen::MatrixXd embed_operator_m(const SparseWeightRow& row, Eigen::Index n);
/// Dense Psi = 1_j 1_j' + w w' = M + 2 1_j w'.
Eigen::MatrixXd embed_operator_psi(const SparseWeightRow& row, Eigen::Index n);

/// theta_j(Y) = tr(Y'MY) / (tr(Y'Psi Y) + c), evaluated through the row
/// y_j and the combination Y'w without forming n x n matrices.
double theta(const Eigen::Ref<const Eigen::MatrixXd>& Y, const SparseWeightRow& row, double c);

/// Gradient of theta_j with respect to Y (n x p). The quadratic form tr(Y'MY)
/// only sees the symmetric part of M, so the gradient is
/// (2 / (tr(Y'Psi Y) + c)) * (sym(M) - theta Psi) Y.
Eigen::MatrixXd theta_gradient(const Eigen::Ref<const Eigen::MatrixXd>& Y, const SparseWeightRow& row, double c);

/// Adds the gradient of theta_j into `grad` and returns theta_j.
double accumulate_theta_gradient(const Eigen::Ref<const Eigen::MatrixXd>& Y, const SparseWeightRow& row, double c,
                                 Eigen::Ref<Eigen::MatrixXd> grad);

/// Sum of theta_j over all rows.
double total_theta(const Eigen::Ref<const Eigen::MatrixXd>& Y, const std::vector<SparseWeightRow>& rows, double c);

/// Projection onto {V : V'1 = 0, V'V / n = I}: center the columns, take the
/// thin SVD Q S W' and return sqrt(n) Q W'. If the centered matrix has rank
/// below p the missing left singular vectors are completed with seeded random
/// directions orthogonal to 1 and to the existing ones.
/// Throws InvalidParameter unless n > p >= 1.
Eigen::MatrixXd project_constraints(const Eigen::Ref<const Eigen::MatrixXd>& A, std::uint64_t seed = 0);

/// ADMM state of one block-index embedding. The embedding is V.
struct EmbeddingMatrix {
  Eigen::MatrixXd Y;
  Eigen::MatrixXd V;
  Eigen::MatrixXd J;
  bool converged = false;
  int iterations_run = 0;
  double final_residual = 0.0;          // ||Y - V||_F / sqrt(n p)
  std::vector<double> objective_trace;  // sum of theta_j at V; entry 0 is the initial point

  const Eigen::MatrixXd& embedding() const noexcept { return V; }
};

/// Embeds n items into p dimensions from their reconstruction rows.
/// Initial Y is a seeded standard normal matrix projected onto the constraint
/// set; V starts equal to it and J at zero.
/// Throws InvalidParameter unless 1 <= p < n, DivergenceError on non-finite iterates.
EmbeddingMatrix solve_embedding(const std::vector<SparseWeightRow>& rows, Eigen::Index n, Eigen::Index p, double c,
                                const AdmmConfig& config);

/// sum_r w_r y_r over the k training neighbors (rows of `neighbor_embeddings`).
Eigen::VectorXd embed_oos(const Eigen::Ref<const Eigen::VectorXd>& weights,
                          const Eigen::Ref<const Eigen::MatrixXd>& neighbor_embeddings);

}  // namespace ssimm
