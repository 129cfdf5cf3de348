#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

namespace ssimm {

/// k-NN lists for one block index. neighbors[j] is ordered nearest first,
/// never contains j itself (training graphs) and has exactly k entries.
struct NeighborGraph {
  Eigen::Index k = 0;
  std::vector<std::vector<Eigen::Index>> neighbors;
  std::vector<std::vector<double>> distances;  // Euclidean (input or feature space)

  Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(neighbors.size()); }
};

/// Indices of the k smallest entries of `sq_distances`, skipping `exclude`
/// (pass -1 for none). Ties go to the smaller index.
std::vector<Eigen::Index> k_smallest(const Eigen::Ref<const Eigen::VectorXd>& sq_distances, Eigen::Index k,
                                     Eigen::Index exclude = -1);

/// Graph over the rows of `blocks` (n x q) by Euclidean distance.
/// Throws InvalidParameter unless 1 <= k < n.
NeighborGraph knn_euclidean(const Eigen::MatrixXd& blocks, Eigen::Index k);

/// Graph from a gram matrix using feature-space distances
/// sqrt(K(a,a) - 2K(a,b) + K(b,b)). Throws InvalidInput on asymmetric input.
NeighborGraph knn_kernel(const Eigen::MatrixXd& gram, Eigen::Index k);

/// For each query row, the k nearest training rows (no exclusion). Requires k <= n.
NeighborGraph knn_oos(const Eigen::MatrixXd& query_blocks, const Eigen::MatrixXd& train_blocks, Eigen::Index k);

/// Same selection from precomputed query-to-training squared distances (n_t x n).
NeighborGraph knn_oos_from_sq_distances(const Eigen::MatrixXd& sq_distances, Eigen::Index k);

}  // namespace ssimm
