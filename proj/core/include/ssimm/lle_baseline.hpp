#pragma once

#include "ssimm/llise_embed.hpp"

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace ssimm {

/// Sum-to-one reconstruction weights of classic LLE.
struct LleWeights {
  Eigen::VectorXd w;     // k, sums to 1
  Eigen::MatrixXd G;     // local gram (or kernel K_j) before regularization
  double regularization = 0.0;
};

struct LleOptions {
  /// When false, singular local grams are handled by the minimum-norm solution
  /// of the constrained least-squares KKT system instead of Tikhonov.
  bool regularize = true;
  /// Relative regularization: eps = factor * tr(G) / k.
  double regularization_factor = 1e-3;
};

/// Solves G w = 1 and normalizes, G = (x 1' - X)'(x 1' - X). When G is
/// singular to working precision, eps = 1e-3 tr(G)/k is added to its diagonal.
/// Throws NumericalError if the system remains singular.
LleWeights lle_weights(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& X,
                       const LleOptions& options = {});

/// Kernel LLE weights from k(x,x), k(x, x_a) and k(x_a, x_b):
/// K_j(a,b) = k(x,x) - k(x,x_a) - k(x,x_b) + k(x_a,x_b).
LleWeights klle_weights(double self, const Eigen::Ref<const Eigen::VectorXd>& cross,
                        const Eigen::Ref<const Eigen::MatrixXd>& among, const LleOptions& options = {});

/// Same solve on an already assembled local gram.
LleWeights weights_from_local_gram(const Eigen::Ref<const Eigen::MatrixXd>& G, const LleOptions& options = {});

struct LleEmbedding {
  Eigen::MatrixXd Y;            // n x p, columns scaled so Y'Y / n = I
  Eigen::MatrixXd M;            // (I - W)'(I - W)
  Eigen::VectorXd eigenvalues;  // of the kept columns, ascending
};

/// Bottom eigenvectors 2..p+1 of M = (I - W)'(I - W). Each kept eigenvector is
/// signed so that its largest-magnitude entry is positive and scaled by sqrt(n).
/// Throws InvalidParameter unless 1 <= p < n, NumericalError on eigensolver failure.
LleEmbedding lle_embed(const std::vector<SparseWeightRow>& rows, Eigen::Index n, Eigen::Index p);

/// Out-of-sample embedding: weights of the query from its training neighbors,
/// then the same combination of the neighbors' embeddings.
Eigen::VectorXd lle_oos(const Eigen::Ref<const Eigen::VectorXd>& query, const Eigen::Ref<const Eigen::MatrixXd>& neighbors,
                        const Eigen::Ref<const Eigen::MatrixXd>& neighbor_embeddings, const LleOptions& options = {});

}  // namespace ssimm
