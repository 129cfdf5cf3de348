#include "ssimm/diagnostics.hpp"

#include "ssimm/kernels.hpp"
#include "ssimm/llise_embed.hpp"
#include "ssimm/llise_reconstruct.hpp"
#include "ssimm/ssim.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <random>

namespace ssimm {

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal;
  return Eigen::MatrixXd::NullaryExpr(rows, cols, [&] { return normal(rng); });
}

Eigen::MatrixXd zero_mean_columns(Eigen::MatrixXd m) {
  m.rowwise() -= m.colwise().mean();
  return m;
}

template <class F>
Eigen::MatrixXd central_difference(const Eigen::MatrixXd& at, double h, F&& f) {
  Eigen::MatrixXd g(at.rows(), at.cols());
  Eigen::MatrixXd probe = at;
  for (Eigen::Index i = 0; i < at.size(); ++i) {
    const double v = probe.data()[i];
    probe.data()[i] = v + h;
    const double fp = f(probe);
    probe.data()[i] = v - h;
    const double fm = f(probe);
    probe.data()[i] = v;
    g.data()[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

double relative_error(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& numeric) {
  return (analytic - numeric).norm() / std::max(numeric.norm(), 1e-8);
}

}  // namespace

std::vector<CheckResult> check_gradients(std::uint64_t seed, int cases, double step, double tolerance) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> kdist(2, 10);
  CheckResult recon{"reconstruction gradient", cases, 0.0, tolerance, true};
  CheckResult embed{"embedding gradient", cases, 0.0, tolerance, true};
  CheckResult kernel{"kernel reconstruction gradient", cases, 0.0, tolerance, true};
  const auto consts = SsimConstants::for_block(16);

  for (int t = 0; t < cases; ++t) {
    // Blocks on the unit intensity scale: zero-mean, spread ~0.1.
    const int k = kdist(rng);
    const Eigen::MatrixXd X = 0.1 * zero_mean_columns(random_matrix(rng, 16, k));
    const Eigen::VectorXd x = 0.1 * zero_mean_columns(random_matrix(rng, 16, 1));
    const Eigen::VectorXd w = random_matrix(rng, k, 1).normalized();
    const Eigen::MatrixXd fd = central_difference(w, step, [&](const Eigen::MatrixXd& v) {
      return recon_objective(v.col(0), x, X, consts.c);
    });
    recon.worst = std::max(recon.worst, relative_error(recon_gradient(w, x, X, consts.c), fd));

    const Eigen::MatrixXd rows = random_matrix(rng, k + 1, 16);
    const auto spec = KernelSpec::with_default_gamma(KernelKind::Rbf, 16);
    const KernelGram gram = normalize_center(gram_matrix(spec, rows));
    std::vector<Eigen::Index> nb(static_cast<std::size_t>(k));
    for (int r = 0; r < k; ++r) nb[static_cast<std::size_t>(r)] = r + 1;
    const auto nk = extract_neighborhood(gram, 0, nb);
    const Eigen::MatrixXd kfd = central_difference(w, step, [&](const Eigen::MatrixXd& v) {
      return kernel_recon_objective(v.col(0), nk, consts.c);
    });
    kernel.worst = std::max(kernel.worst, relative_error(kernel_recon_gradient(w, nk, consts.c), kfd));

    const Eigen::Index n = k + 4;
    const Eigen::Index p = 1 + t % 4;
    const Eigen::MatrixXd Y = random_matrix(rng, n, p);
    SparseWeightRow row;
    row.owner = 0;
    for (Eigen::Index r = 0; r < k; ++r) row.indices.push_back(r + 1 + (r >= 3 ? 2 : 0));
    row.weights = random_matrix(rng, k, 1).normalized();
    const Eigen::MatrixXd efd = central_difference(Y, step, [&](const Eigen::MatrixXd& v) { return theta(v, row, consts.c); });
    embed.worst = std::max(embed.worst, relative_error(theta_gradient(Y, row, consts.c), efd));
  }
  for (auto* r : {&recon, &embed, &kernel}) r->passed = r->worst < tolerance;
  return {recon, embed, kernel};
}

CheckResult check_projection(std::uint64_t seed, int cases) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> ndist(5, 50), pdist(1, 5);
  CheckResult result{"projection contract", cases, 0.0, 1e-9, true};
  for (int t = 0; t < cases; ++t) {
    const int n = ndist(rng);
    const int p = std::min(pdist(rng), n - 1);
    const Eigen::MatrixXd V = project_constraints(random_matrix(rng, n, p), seed + static_cast<std::uint64_t>(t));
    const double sums = (V.transpose() * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff();
    const double ortho = (V.transpose() * V / n - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff();
    const double again = (project_constraints(V, seed) - V).norm();
    result.worst = std::max({result.worst, sums, ortho, 10.0 * again});
  }
  result.passed = result.worst < result.tolerance;
  return result;
}

std::vector<CheckResult> run_verification(std::uint64_t seed) {
  auto results = check_gradients(seed);
  results.push_back(check_projection(seed + 1));
  return results;
}

}  // namespace ssimm
