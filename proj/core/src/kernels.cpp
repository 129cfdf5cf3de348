#include "ssimm/kernels.hpp"

#include "ssimm/error.hpp"

#include <cmath>

namespace ssimm {

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Linear: return "linear";
    case KernelKind::Polynomial: return "polynomial";
    case KernelKind::Rbf: return "rbf";
    case KernelKind::Sigmoid: return "sigmoid";
  }
  return "unknown";
}

KernelKind parse_kernel_kind(std::string_view name) {
  if (name == "linear") return KernelKind::Linear;
  if (name == "polynomial" || name == "poly") return KernelKind::Polynomial;
  if (name == "rbf") return KernelKind::Rbf;
  if (name == "sigmoid") return KernelKind::Sigmoid;
  throw InvalidParameter("unknown kernel '" + std::string(name) + "'");
}

KernelSpec KernelSpec::with_default_gamma(KernelKind kind, Eigen::Index dimension) {
  if (dimension <= 0) throw InvalidParameter("kernel dimension must be positive");
  return KernelSpec{kind, 1.0 / static_cast<double>(dimension)};
}

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x1,
                   const Eigen::Ref<const Eigen::VectorXd>& x2) {
  if (x1.size() != x2.size()) throw InvalidInput("kernel_eval: length mismatch");
  switch (spec.kind) {
    case KernelKind::Linear:
      return x1.dot(x2);
    case KernelKind::Polynomial: {
      const double base = spec.gamma * x1.dot(x2) + 1.0;
      return base * base * base;
    }
    case KernelKind::Rbf:
      return std::exp(-spec.gamma * (x1 - x2).squaredNorm());
    case KernelKind::Sigmoid:
      return std::tanh(spec.gamma * x1.dot(x2) + 1.0);
  }
  throw InvalidParameter("kernel_eval: unknown kernel kind");
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Eigen::MatrixXd& rows) {
  const Eigen::Index n = rows.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a; b < n; ++b) {
      const double v = kernel_eval(spec, rows.row(a).transpose(), rows.row(b).transpose());
      k(a, b) = v;
      k(b, a) = v;
    }
  }
  return k;
}

Eigen::MatrixXd cross_gram(const KernelSpec& spec, const Eigen::MatrixXd& query_rows, const Eigen::MatrixXd& train_rows) {
  if (query_rows.cols() != train_rows.cols()) throw InvalidInput("cross_gram: dimension mismatch");
  Eigen::MatrixXd k(query_rows.rows(), train_rows.rows());
  for (Eigen::Index t = 0; t < query_rows.rows(); ++t) {
    for (Eigen::Index a = 0; a < train_rows.rows(); ++a) {
      k(t, a) = kernel_eval(spec, query_rows.row(t).transpose(), train_rows.row(a).transpose());
    }
  }
  return k;
}

namespace {

void check_square_symmetric(const Eigen::MatrixXd& k, const char* who) {
  if (k.rows() != k.cols()) throw InvalidInput(std::string(who) + ": gram must be square");
  if (k.rows() > 0 && (k - k.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
    throw InvalidInput(std::string(who) + ": gram is not symmetric");
  }
}

}  // namespace

Eigen::MatrixXd cosine_normalize(const Eigen::MatrixXd& raw) {
  check_square_symmetric(raw, "cosine_normalize");
  const Eigen::VectorXd diag = raw.diagonal();
  for (Eigen::Index a = 0; a < diag.size(); ++a) {
    if (!(diag[a] > 0.0)) {
      throw InvalidInput("cosine_normalize: non-positive diagonal entry " + std::to_string(diag[a]) + " at " +
                         std::to_string(a));
    }
  }
  const Eigen::VectorXd inv_sqrt = diag.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd k = inv_sqrt.asDiagonal() * raw * inv_sqrt.asDiagonal();
  k.diagonal().setOnes();
  return k;
}

Eigen::MatrixXd double_center(const Eigen::MatrixXd& k) {
  // H K H expanded: K - row means - column means + grand mean.
  const Eigen::RowVectorXd col_means = k.colwise().mean();
  const Eigen::VectorXd row_means = k.rowwise().mean();
  const double grand = k.mean();
  Eigen::MatrixXd c = k;
  c.rowwise() -= col_means;
  c.colwise() -= row_means;
  c.array() += grand;
  return c;
}

KernelGram normalize_center(const Eigen::MatrixXd& raw) {
  KernelGram g;
  g.raw_diagonal = raw.diagonal();
  const Eigen::MatrixXd normalized = cosine_normalize(raw);
  g.column_means = normalized.colwise().mean().transpose();
  g.grand_mean = normalized.mean();
  g.K = double_center(normalized);
  // Restore exact symmetry lost to round-off in the centering.
  g.K = 0.5 * (g.K + g.K.transpose()).eval();
  g.normalized = true;
  g.centered = true;
  return g;
}

namespace {

double entry_magnitude(const KernelGram& gram) {
  if (gram.normalized) return 1.0;
  return gram.size() > 0 ? gram.K.diagonal().cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace

NeighborhoodKernel extract_neighborhood(const KernelGram& gram, Eigen::Index j, std::span<const Eigen::Index> neighbors) {
  const Eigen::Index n = gram.size();
  auto check = [n](Eigen::Index idx) {
    if (idx < 0 || idx >= n) throw InvalidInput("extract_neighborhood: index " + std::to_string(idx) + " out of range");
  };
  check(j);
  const auto k = static_cast<Eigen::Index>(neighbors.size());
  NeighborhoodKernel out;
  out.magnitude = entry_magnitude(gram);
  out.self = gram.K(j, j);
  out.cross.resize(k);
  out.among.resize(k, k);
  for (Eigen::Index r = 0; r < k; ++r) {
    check(neighbors[r]);
    out.cross[r] = gram.K(neighbors[r], j);
    for (Eigen::Index s = 0; s < k; ++s) out.among(r, s) = gram.K(neighbors[r], neighbors[s]);
  }
  return out;
}

OosKernelRow center_oos(const KernelGram& gram, double raw_self, const Eigen::Ref<const Eigen::VectorXd>& raw_cross) {
  const Eigen::Index n = gram.size();
  if (raw_cross.size() != n) throw InvalidInput("center_oos: cross kernel length mismatch");
  if (!(raw_self > 0.0)) throw InvalidInput("center_oos: non-positive self kernel");
  const Eigen::VectorXd normalized =
      raw_cross.cwiseQuotient((raw_self * gram.raw_diagonal.array()).sqrt().matrix());
  const double row_mean = normalized.mean();
  OosKernelRow row;
  row.cross = normalized.array() - row_mean - gram.column_means.array() + gram.grand_mean;
  row.self = 1.0 - 2.0 * row_mean + gram.grand_mean;
  return row;
}

OosKernelRow cross_kernel_oos(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& query,
                              const Eigen::MatrixXd& train_rows, const KernelGram& gram) {
  if (train_rows.rows() != gram.size()) throw InvalidInput("cross_kernel_oos: training rows do not match gram");
  Eigen::VectorXd raw(train_rows.rows());
  for (Eigen::Index a = 0; a < train_rows.rows(); ++a) raw[a] = kernel_eval(spec, query, train_rows.row(a).transpose());
  return center_oos(gram, kernel_eval(spec, query, query), raw);
}

NeighborhoodKernel extract_oos_neighborhood(const KernelGram& gram, const OosKernelRow& row,
                                            std::span<const Eigen::Index> neighbors) {
  const auto k = static_cast<Eigen::Index>(neighbors.size());
  NeighborhoodKernel out;
  out.magnitude = entry_magnitude(gram);
  out.self = row.self;
  out.cross.resize(k);
  out.among.resize(k, k);
  for (Eigen::Index r = 0; r < k; ++r) {
    if (neighbors[r] < 0 || neighbors[r] >= gram.size()) throw InvalidInput("extract_oos_neighborhood: index out of range");
    out.cross[r] = row.cross[neighbors[r]];
    for (Eigen::Index s = 0; s < k; ++s) out.among(r, s) = gram.K(neighbors[r], neighbors[s]);
  }
  return out;
}

Eigen::VectorXd oos_feature_sq_distances(const KernelGram& gram, const OosKernelRow& row) {
  return (row.self - 2.0 * row.cross.array() + gram.K.diagonal().array()).cwiseMax(0.0).matrix();
}

}  // namespace ssimm
