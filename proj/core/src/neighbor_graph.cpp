#include "ssimm/neighbor_graph.hpp"

#include "ssimm/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ssimm {

std::vector<Eigen::Index> k_smallest(const Eigen::Ref<const Eigen::VectorXd>& sq_distances, Eigen::Index k,
                                     Eigen::Index exclude) {
  std::vector<Eigen::Index> order;
  order.reserve(static_cast<std::size_t>(sq_distances.size()));
  for (Eigen::Index a = 0; a < sq_distances.size(); ++a) {
    if (a != exclude) order.push_back(a);
  }
  if (k > static_cast<Eigen::Index>(order.size())) throw InvalidParameter("k exceeds the number of candidates");
  const auto closer = [&](Eigen::Index a, Eigen::Index b) {
    const double da = sq_distances[a], db = sq_distances[b];
    return da < db || (da == db && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + k, order.end(), closer);
  order.resize(static_cast<std::size_t>(k));
  return order;
}

namespace {

NeighborGraph from_sq_distances(const Eigen::MatrixXd& sq, Eigen::Index k, bool exclude_self) {
  NeighborGraph g;
  g.k = k;
  g.neighbors.reserve(static_cast<std::size_t>(sq.rows()));
  g.distances.reserve(static_cast<std::size_t>(sq.rows()));
  for (Eigen::Index j = 0; j < sq.rows(); ++j) {
    const Eigen::VectorXd row = sq.row(j).transpose().cwiseMax(0.0);
    auto idx = k_smallest(row, k, exclude_self ? j : -1);
    std::vector<double> dist;
    dist.reserve(idx.size());
    for (const auto a : idx) dist.push_back(std::sqrt(row[a]));
    g.neighbors.push_back(std::move(idx));
    g.distances.push_back(std::move(dist));
  }
  return g;
}

void check_training_k(Eigen::Index k, Eigen::Index n) {
  if (k < 1 || k >= n) {
    throw InvalidParameter("k-NN needs 1 <= k < n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
  }
}

Eigen::MatrixXd pairwise_sq_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd sq(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) sq(i, j) = (a.row(i) - b.row(j)).squaredNorm();
  }
  return sq;
}

}  // namespace

NeighborGraph knn_euclidean(const Eigen::MatrixXd& blocks, Eigen::Index k) {
  check_training_k(k, blocks.rows());
  return from_sq_distances(pairwise_sq_distances(blocks, blocks), k, true);
}

NeighborGraph knn_kernel(const Eigen::MatrixXd& gram, Eigen::Index k) {
  if (gram.rows() != gram.cols()) throw InvalidInput("knn_kernel: gram must be square");
  if (gram.size() > 0 && (gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw InvalidInput("knn_kernel: gram is not symmetric");
  }
  check_training_k(k, gram.rows());
  const Eigen::VectorXd diag = gram.diagonal();
  Eigen::MatrixXd sq = (-2.0 * gram).colwise() + diag;
  sq.rowwise() += diag.transpose();
  return from_sq_distances(sq, k, true);
}

NeighborGraph knn_oos(const Eigen::MatrixXd& query_blocks, const Eigen::MatrixXd& train_blocks, Eigen::Index k) {
  if (query_blocks.cols() != train_blocks.cols()) throw InvalidInput("knn_oos: block length mismatch");
  return knn_oos_from_sq_distances(pairwise_sq_distances(query_blocks, train_blocks), k);
}

NeighborGraph knn_oos_from_sq_distances(const Eigen::MatrixXd& sq_distances, Eigen::Index k) {
  if (k < 1 || k > sq_distances.cols()) {
    throw InvalidParameter("out-of-sample k-NN needs 1 <= k <= n (k=" + std::to_string(k) +
                           ", n=" + std::to_string(sq_distances.cols()) + ")");
  }
  return from_sq_distances(sq_distances, k, false);
}

}  // namespace ssimm
