#include "ssimm/llise_reconstruct.hpp"

#include "ssimm/error.hpp"

#include <cmath>
#include <vector>

namespace ssimm {

AdmmConfig AdmmConfig::reconstruction() { return AdmmConfig{0.1, 0.1, 2000, 1e-6, 0}; }

AdmmConfig AdmmConfig::kernel_reconstruction() { return AdmmConfig{0.01, 0.1, 2000, 1e-6, 0}; }

AdmmConfig AdmmConfig::embedding() { return AdmmConfig{0.01, 0.01, 5000, 1e-5, 0}; }

void AdmmConfig::validate() const {
  if (!(rho > 0.0)) throw InvalidParameter("ADMM rho must be positive");
  if (!(eta > 0.0)) throw InvalidParameter("ADMM eta must be positive");
  if (!(tol > 0.0)) throw InvalidParameter("ADMM tol must be positive");
  if (max_iter <= 0) throw InvalidParameter("ADMM max_iter must be positive");
}

double recon_objective(const Eigen::Ref<const Eigen::VectorXd>& w, const Eigen::Ref<const Eigen::VectorXd>& x,
                       const Eigen::Ref<const Eigen::MatrixXd>& X, double c) {
  const Eigen::VectorXd xw = X * w;
  const double xx = x.squaredNorm();
  const double ww = xw.squaredNorm();
  return (xx + ww - 2.0 * xw.dot(x)) / (xx + ww + c);
}

Eigen::VectorXd recon_gradient(const Eigen::Ref<const Eigen::VectorXd>& w, const Eigen::Ref<const Eigen::VectorXd>& x,
                               const Eigen::Ref<const Eigen::MatrixXd>& X, double c) {
  const Eigen::VectorXd xw = X * w;
  const double xx = x.squaredNorm();
  const double ww = xw.squaredNorm();
  const double den = xx + ww + c;
  const double f = (xx + ww - 2.0 * xw.dot(x)) / den;
  return 2.0 * X.transpose() * ((1.0 - f) * xw - x) / den;
}

double kernel_recon_objective(const Eigen::Ref<const Eigen::VectorXd>& w, const NeighborhoodKernel& nk, double c) {
  const double quad = w.dot(nk.among * w);
  return (nk.self + quad - 2.0 * w.dot(nk.cross)) / (nk.self + quad + c);
}

Eigen::VectorXd kernel_recon_gradient(const Eigen::Ref<const Eigen::VectorXd>& w, const NeighborhoodKernel& nk,
                                      double c) {
  const Eigen::VectorXd kw = nk.among * w;
  const double quad = w.dot(kw);
  const double den = nk.self + quad + c;
  const double f = (nk.self + quad - 2.0 * w.dot(nk.cross)) / den;
  return 2.0 * ((1.0 - f) * kw - nk.cross) / den;
}

namespace {

ReconstructionWeights one_hot(Eigen::Index k, Eigen::Index r) {
  ReconstructionWeights s;
  s.w = Eigen::VectorXd::Unit(k, r);
  s.xi = s.w;
  s.dual = Eigen::VectorXd::Zero(k);
  s.converged = true;
  return s;
}

// Relative test for a zero squared distance; exact copies give exactly 0.
bool is_copy(double sq_distance, double scale) { return sq_distance <= 1e-14 * scale; }

template <typename Gradient>
ReconstructionWeights run_admm(Eigen::Index k, Gradient&& gradient, const AdmmConfig& config,
                               const AdmmObserver& observer) {
  config.validate();
  if (k < 1) throw InvalidInput("reconstruction needs at least one neighbor");

  ReconstructionWeights s;
  s.w = Eigen::VectorXd::Constant(k, 1.0 / std::sqrt(static_cast<double>(k)));
  s.xi = s.w;
  s.dual = Eigen::VectorXd::Zero(k);

  for (int it = 1; it <= config.max_iter; ++it) {
    const Eigen::VectorXd g = gradient(s.w);
    s.w = s.w - config.eta * g - config.eta * config.rho * (s.w - s.xi + s.dual);

    const Eigen::VectorXd shifted = s.w + s.dual;
    const double norm = shifted.norm();
    if (!std::isfinite(norm)) throw DivergenceError("ADMM reconstruction produced a non-finite iterate", it);
    if (norm > 0.0) s.xi = shifted / norm;  // otherwise keep the previous point on the sphere

    s.dual += s.w - s.xi;
    s.iterations_run = it;
    s.final_residual = (s.w - s.xi).norm();
    if (!std::isfinite(s.final_residual)) {
      throw DivergenceError("ADMM reconstruction produced a non-finite residual", it);
    }
    if (observer) observer(it, s.w, s.xi, s.dual);
    if (s.final_residual <= config.tol) {
      s.converged = true;
      break;
    }
  }
  return s;
}

}  // namespace

ReconstructionWeights solve_weights(const Eigen::Ref<const Eigen::VectorXd>& x,
                                    const Eigen::Ref<const Eigen::MatrixXd>& X, double c, const AdmmConfig& config,
                                    const AdmmObserver& observer) {
  if (X.rows() != x.size()) throw InvalidInput("solve_weights: neighbor matrix has wrong block length");
  if (config.exact_copy_rule) {
    config.validate();
    const double xx = x.squaredNorm();
    for (Eigen::Index r = 0; r < X.cols(); ++r) {
      if (is_copy((X.col(r) - x).squaredNorm(), xx + X.col(r).squaredNorm())) return one_hot(X.cols(), r);
    }
  }
  // Iterate on the inner products x'x, X'x and X'X: the same arithmetic as
  // the kernel path with a linear kernel, and k x k work per step.
  const Eigen::Index k = X.cols();
  std::vector<Eigen::VectorXd> cols(static_cast<std::size_t>(k));
  for (Eigen::Index r = 0; r < k; ++r) cols[static_cast<std::size_t>(r)] = X.col(r);
  const Eigen::VectorXd xv = x;
  NeighborhoodKernel nk;
  nk.self = xv.dot(xv);
  nk.cross.resize(k);
  nk.among.resize(k, k);
  for (Eigen::Index r = 0; r < k; ++r) {
    const auto& cr = cols[static_cast<std::size_t>(r)];
    nk.cross[r] = cr.dot(xv);
    for (Eigen::Index t = 0; t <= r; ++t) nk.among(r, t) = nk.among(t, r) = cr.dot(cols[static_cast<std::size_t>(t)]);
  }
  return run_admm(k, [&](const Eigen::VectorXd& w) { return kernel_recon_gradient(w, nk, c); }, config, observer);
}

ReconstructionWeights solve_weights_kernel(const NeighborhoodKernel& nk, double c, const AdmmConfig& config,
                                           const AdmmObserver& observer) {
  const Eigen::Index k = nk.cross.size();
  if (nk.among.rows() != k || nk.among.cols() != k) throw InvalidInput("solve_weights_kernel: size mismatch");
  if (k > 0 && (nk.among - nk.among.transpose()).cwiseAbs().maxCoeff() > 1e-8) {
    throw InvalidInput("solve_weights_kernel: neighbor kernel block is not symmetric");
  }
  if (config.exact_copy_rule) {
    config.validate();
    for (Eigen::Index r = 0; r < k; ++r) {
      const double sq = nk.self + nk.among(r, r) - 2.0 * nk.cross[r];
      if (is_copy(sq, std::abs(nk.self) + std::abs(nk.among(r, r)) + nk.magnitude)) return one_hot(k, r);
    }
  }
  return run_admm(k, [&](const Eigen::VectorXd& w) { return kernel_recon_gradient(w, nk, c); }, config, observer);
}

}  // namespace ssimm
