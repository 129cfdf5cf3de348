#pragma once

#include <Eigen/Core>

#include <span>
#include <string>
#include <string_view>

namespace ssimm {

enum class KernelKind { Linear, Polynomial, Rbf, Sigmoid };

std::string_view to_string(KernelKind kind);
/// Accepts "linear", "polynomial"/"poly", "rbf", "sigmoid". Throws InvalidParameter.
KernelKind parse_kernel_kind(std::string_view name);

struct KernelSpec {
  KernelKind kind = KernelKind::Rbf;
  double gamma = 1.0;  // must be > 0; 1/q for block kernels

  /// gamma = 1 / dimension, the default used for blocks of length q.
  static KernelSpec with_default_gamma(KernelKind kind, Eigen::Index dimension);
};

/// Linear x1'x2, Polynomial (gamma x1'x2 + 1)^3, Rbf exp(-gamma |x1-x2|^2),
/// Sigmoid tanh(gamma x1'x2 + 1).
double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x1,
                   const Eigen::Ref<const Eigen::VectorXd>& x2);

/// Raw n x n gram over the rows of `rows`.
Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Eigen::MatrixXd& rows);

/// Raw cross gram: entry (t, a) = k(query_t, train_a).
Eigen::MatrixXd cross_gram(const KernelSpec& spec, const Eigen::MatrixXd& query_rows, const Eigen::MatrixXd& train_rows);

/// Cosine normalization K(a,b) / sqrt(K(a,a) K(b,b)). Throws InvalidInput on a
/// non-positive diagonal entry.
Eigen::MatrixXd cosine_normalize(const Eigen::MatrixXd& raw);

/// K <- H K H with H = I - (1/n) 11'.
Eigen::MatrixXd double_center(const Eigen::MatrixXd& k);

/// Normalized, double-centered gram for one block index, with the training
/// statistics needed to map out-of-sample kernel values consistently.
struct KernelGram {
  Eigen::MatrixXd K;             // n x n, normalized then centered
  bool normalized = false;
  bool centered = false;
  Eigen::VectorXd raw_diagonal;  // k(x_a, x_a) before normalization
  Eigen::VectorXd column_means;  // column means of the normalized gram
  double grand_mean = 0.0;       // mean of all normalized entries

  Eigen::Index size() const noexcept { return K.rows(); }
};

/// Cosine-normalize then double-center. Input must be square and symmetric.
KernelGram normalize_center(const Eigen::MatrixXd& raw);

/// Kernel pieces of one neighborhood: k(x,x), k(neighbors, x) and
/// k(neighbors, neighbors).
struct NeighborhoodKernel {
  double self = 0.0;
  Eigen::VectorXd cross;  // k
  Eigen::MatrixXd among;  // k x k
  /// Size of the entries before centering (1 for normalized grams). Centering
  /// can leave tiny values whose round-off is set by this magnitude instead.
  double magnitude = 0.0;
};

/// Reads the pieces for training image `j` from the centered gram.
NeighborhoodKernel extract_neighborhood(const KernelGram& gram, Eigen::Index j, std::span<const Eigen::Index> neighbors);

/// Centered kernel values of one out-of-sample block against every training block.
struct OosKernelRow {
  double self = 0.0;      // centered k(z, z)
  Eigen::VectorXd cross;  // centered k(z, x_a), length n
};

/// Applies the training normalization and centering to raw query kernel values.
/// `raw_self` = k(z,z), `raw_cross`(a) = k(z, x_a).
OosKernelRow center_oos(const KernelGram& gram, double raw_self, const Eigen::Ref<const Eigen::VectorXd>& raw_cross);

/// Evaluates the kernel against the training rows and centers the result.
OosKernelRow cross_kernel_oos(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& query,
                              const Eigen::MatrixXd& train_rows, const KernelGram& gram);

/// Neighborhood pieces for an out-of-sample block; Kmat comes from the training gram.
NeighborhoodKernel extract_oos_neighborhood(const KernelGram& gram, const OosKernelRow& row,
                                            std::span<const Eigen::Index> neighbors);

/// Squared feature-space distances k(z,z) - 2 k(z,a) + k(a,a), clamped at zero.
Eigen::VectorXd oos_feature_sq_distances(const KernelGram& gram, const OosKernelRow& row);

}  // namespace ssimm
