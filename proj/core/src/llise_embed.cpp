#include "ssimm/llise_embed.hpp"

#include "ssimm/error.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <random>
#include <string>

namespace ssimm {

Eigen::VectorXd SparseWeightRow::dense(Eigen::Index n) const {
  if (static_cast<Eigen::Index>(indices.size()) != weights.size()) {
    throw InvalidInput("SparseWeightRow: index and weight counts differ");
  }
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const Eigen::Index idx = indices[r];
    if (idx < 0 || idx >= n) throw InvalidInput("SparseWeightRow: index out of range");
    if (idx == owner) throw InvalidInput("SparseWeightRow: owner listed as its own neighbor");
    w[idx] += weights[static_cast<Eigen::Index>(r)];
  }
  return w;
}

Eigen::MatrixXd embed_operator_m(const SparseWeightRow& row, Eigen::Index n) {
  const Eigen::VectorXd w = row.dense(n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e[row.owner] = 1.0;
  return e * e.transpose() + w * w.transpose() - 2.0 * e * w.transpose();
}

Eigen::MatrixXd embed_operator_psi(const SparseWeightRow& row, Eigen::Index n) {
  const Eigen::VectorXd w = row.dense(n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e[row.owner] = 1.0;
  return e * e.transpose() + w * w.transpose();
}

namespace {

// Y'w for the sparse weight vector.
Eigen::VectorXd combine(const Eigen::Ref<const Eigen::MatrixXd>& Y, const SparseWeightRow& row) {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(Y.cols());
  for (std::size_t r = 0; r < row.indices.size(); ++r) {
    u += row.weights[static_cast<Eigen::Index>(r)] * Y.row(row.indices[r]).transpose();
  }
  return u;
}

}  // namespace

double theta(const Eigen::Ref<const Eigen::MatrixXd>& Y, const SparseWeightRow& row, double c) {
  const Eigen::VectorXd y = Y.row(row.owner).transpose();
  const Eigen::VectorXd u = combine(Y, row);
  return (y - u).squaredNorm() / (y.squaredNorm() + u.squaredNorm() + c);
}

double accumulate_theta_gradient(const Eigen::Ref<const Eigen::MatrixXd>& Y, const SparseWeightRow& row, double c,
                                 Eigen::Ref<Eigen::MatrixXd> grad) {
  const Eigen::RowVectorXd y = Y.row(row.owner);
  const Eigen::RowVectorXd u = combine(Y, row).transpose();
  const Eigen::RowVectorXd diff = y - u;
  const double den = y.squaredNorm() + u.squaredNorm() + c;
  const double th = diff.squaredNorm() / den;
  const double scale = 2.0 / den;
  // sym(M) Y = 1_j (y - u)' - w (y - u)',  Psi Y = 1_j y' + w u'.
  grad.row(row.owner) += scale * (diff - th * y);
  const Eigen::RowVectorXd neighbor_term = scale * (-diff - th * u);
  for (std::size_t r = 0; r < row.indices.size(); ++r) {
    grad.row(row.indices[r]) += row.weights[static_cast<Eigen::Index>(r)] * neighbor_term;
  }
  return th;
}

Eigen::MatrixXd theta_gradient(const Eigen::Ref<const Eigen::MatrixXd>& Y, const SparseWeightRow& row, double c) {
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(Y.rows(), Y.cols());
  accumulate_theta_gradient(Y, row, c, grad);
  return grad;
}

double total_theta(const Eigen::Ref<const Eigen::MatrixXd>& Y, const std::vector<SparseWeightRow>& rows, double c) {
  double sum = 0.0;
  for (const auto& row : rows) sum += theta(Y, row, c);
  return sum;
}

Eigen::MatrixXd project_constraints(const Eigen::Ref<const Eigen::MatrixXd>& A, std::uint64_t seed) {
  const Eigen::Index n = A.rows();
  const Eigen::Index p = A.cols();
  if (p < 1 || n <= p) {
    throw InvalidParameter("project_constraints needs n > p >= 1 (n=" + std::to_string(n) + ", p=" +
                           std::to_string(p) + ")");
  }
  Eigen::MatrixXd centered = A.rowwise() - A.colwise().mean();
  if (!centered.allFinite()) throw NumericalError("project_constraints: non-finite input");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::MatrixXd Q = svd.matrixU();
  const Eigen::VectorXd& sv = svd.singularValues();
  const double threshold = static_cast<double>(n) * 1e-13 * std::max(sv[0], 1e-300);

  Eigen::Index rank = 0;
  while (rank < p && sv[rank] > threshold) ++rank;

  if (rank < p) {
    // Complete the basis: random directions orthogonal to 1 and to the kept columns.
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const Eigen::VectorXd ones = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    for (Eigen::Index col = rank; col < p; ++col) {
      Eigen::VectorXd v(n);
      double norm = 0.0;
      while (norm < 1e-8) {
        for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
        for (int pass = 0; pass < 2; ++pass) {
          v -= ones.dot(v) * ones;
          for (Eigen::Index prev = 0; prev < col; ++prev) v -= Q.col(prev).dot(v) * Q.col(prev);
        }
        norm = v.norm();
      }
      Q.col(col) = v / norm;
    }
  }
  return std::sqrt(static_cast<double>(n)) * Q * svd.matrixV().transpose();
}

EmbeddingMatrix solve_embedding(const std::vector<SparseWeightRow>& rows, Eigen::Index n, Eigen::Index p, double c,
                                const AdmmConfig& config) {
  config.validate();
  if (p < 1 || p >= n) {
    throw InvalidParameter("solve_embedding needs 1 <= p < n (p=" + std::to_string(p) + ", n=" + std::to_string(n) +
                           ")");
  }
  for (const auto& row : rows) {
    if (row.owner < 0 || row.owner >= n) throw InvalidInput("solve_embedding: row owner out of range");
    (void)row.dense(n);  // validates neighbor indices
  }

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd init(n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) init(i, j) = normal(rng);
  }

  EmbeddingMatrix s;
  s.Y = project_constraints(init, config.seed);
  s.V = s.Y;
  s.J = Eigen::MatrixXd::Zero(n, p);
  s.objective_trace.push_back(total_theta(s.V, rows, c));

  const double scale = std::sqrt(static_cast<double>(n * p));
  Eigen::MatrixXd grad(n, p);
  for (int it = 1; it <= config.max_iter; ++it) {
    grad.setZero();
    for (const auto& row : rows) accumulate_theta_gradient(s.Y, row, c, grad);
    s.Y = s.Y - config.eta * grad - config.eta * config.rho * (s.Y - s.V + s.J);
    if (!s.Y.allFinite()) throw DivergenceError("ADMM embedding produced a non-finite iterate", it);

    s.V = project_constraints(s.Y + s.J, config.seed + static_cast<std::uint64_t>(it));
    s.J += s.Y - s.V;
    s.iterations_run = it;
    s.final_residual = (s.Y - s.V).norm() / scale;
    s.objective_trace.push_back(total_theta(s.V, rows, c));
    if (s.final_residual <= config.tol) {
      s.converged = true;
      break;
    }
  }
  return s;
}

Eigen::VectorXd embed_oos(const Eigen::Ref<const Eigen::VectorXd>& weights,
                          const Eigen::Ref<const Eigen::MatrixXd>& neighbor_embeddings) {
  if (weights.size() != neighbor_embeddings.rows()) throw InvalidInput("embed_oos: weight count mismatch");
  return neighbor_embeddings.transpose() * weights;
}

}  // namespace ssimm
