#include "ssimm/lle_baseline.hpp"

#include "ssimm/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <string>

namespace ssimm {

namespace {

// Reciprocal condition estimate from the symmetric eigenvalues.
bool numerically_singular(const Eigen::MatrixXd& G) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double largest = ev.cwiseAbs().maxCoeff();
  if (largest == 0.0) return true;
  return ev.minCoeff() <= 1e-12 * largest;
}

Eigen::VectorXd normalized(const Eigen::VectorXd& v) {
  const double sum = v.sum();
  if (!std::isfinite(sum) || std::abs(sum) < 1e-300) throw NumericalError("LLE weights cannot be normalized");
  return v / sum;
}

}  // namespace

LleWeights weights_from_local_gram(const Eigen::Ref<const Eigen::MatrixXd>& G, const LleOptions& options) {
  const Eigen::Index k = G.rows();
  if (k < 1 || G.cols() != k) throw InvalidParameter("LLE needs a square local gram with k >= 1");

  LleWeights out;
  out.G = 0.5 * (G + G.transpose());
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(k);

  if (!options.regularize) {
    // Constrained least squares: [G 1; 1' 0] [w; l] = [0; 1], minimum norm.
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
    kkt.topLeftCorner(k, k) = out.G;
    kkt.topRightCorner(k, 1) = ones;
    kkt.bottomLeftCorner(1, k) = ones.transpose();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
    rhs[k] = 1.0;
    const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    out.w = normalized(sol.head(k));
    return out;
  }

  Eigen::MatrixXd system = out.G;
  if (numerically_singular(system)) {
    const double trace = system.trace();
    out.regularization = options.regularization_factor * (trace > 0.0 ? trace : 1.0) / static_cast<double>(k);
    system.diagonal().array() += out.regularization;
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(system);
  if (ldlt.info() != Eigen::Success || numerically_singular(system)) {
    throw NumericalError("LLE local gram is singular after regularization");
  }
  out.w = normalized(ldlt.solve(ones));
  return out;
}

LleWeights lle_weights(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& X,
                       const LleOptions& options) {
  if (X.rows() != x.size()) throw InvalidInput("lle_weights: neighbor matrix has wrong dimension");
  if (X.cols() < 1) throw InvalidParameter("lle_weights: k must be at least 1");
  const Eigen::MatrixXd diff = (-X).colwise() + x;  // x 1' - X
  // A neighbor identical to the query is the one-hot limit of the regularized solve.
  for (Eigen::Index r = 0; r < diff.cols(); ++r) {
    if (diff.col(r).squaredNorm() == 0.0) {
      LleWeights exact;
      exact.G = diff.transpose() * diff;
      exact.w = Eigen::VectorXd::Unit(diff.cols(), r);
      return exact;
    }
  }
  return weights_from_local_gram(diff.transpose() * diff, options);
}

LleWeights klle_weights(double self, const Eigen::Ref<const Eigen::VectorXd>& cross,
                        const Eigen::Ref<const Eigen::MatrixXd>& among, const LleOptions& options) {
  const Eigen::Index k = cross.size();
  if (among.rows() != k || among.cols() != k) throw InvalidInput("klle_weights: size mismatch");
  Eigen::MatrixXd G = among;
  G.array() += self;
  G.colwise() -= cross;
  G.rowwise() -= cross.transpose();
  // Zero feature-space distance to a neighbor: same one-hot limit as in input space.
  const double scale = std::max({std::abs(self), among.cwiseAbs().maxCoeff(), 1e-300});
  for (Eigen::Index r = 0; r < k; ++r) {
    if (G(r, r) <= 1e-14 * scale) {
      LleWeights exact;
      exact.G = G;
      exact.w = Eigen::VectorXd::Unit(k, r);
      return exact;
    }
  }
  return weights_from_local_gram(G, options);
}

LleEmbedding lle_embed(const std::vector<SparseWeightRow>& rows, Eigen::Index n, Eigen::Index p) {
  if (p < 1 || p >= n) throw InvalidParameter("lle_embed needs 1 <= p < n");
  Eigen::MatrixXd IminusW = Eigen::MatrixXd::Identity(n, n);
  for (const auto& row : rows) IminusW.row(row.owner) -= row.dense(n).transpose();

  LleEmbedding out;
  out.M = IminusW.transpose() * IminusW;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(out.M);
  if (es.info() != Eigen::Success) throw NumericalError("lle_embed: eigensolver failed");

  out.Y = es.eigenvectors().middleCols(1, p);
  out.eigenvalues = es.eigenvalues().segment(1, p);
  for (Eigen::Index col = 0; col < p; ++col) {
    Eigen::Index arg = 0;
    out.Y.col(col).cwiseAbs().maxCoeff(&arg);
    if (out.Y(arg, col) < 0.0) out.Y.col(col) *= -1.0;
  }
  out.Y *= std::sqrt(static_cast<double>(n));
  return out;
}

Eigen::VectorXd lle_oos(const Eigen::Ref<const Eigen::VectorXd>& query, const Eigen::Ref<const Eigen::MatrixXd>& neighbors,
                        const Eigen::Ref<const Eigen::MatrixXd>& neighbor_embeddings, const LleOptions& options) {
  const LleWeights w = lle_weights(query, neighbors, options);
  if (neighbor_embeddings.rows() != w.w.size()) throw InvalidInput("lle_oos: embedding rows do not match neighbors");
  return neighbor_embeddings.transpose() * w.w;
}

}  // namespace ssimm
