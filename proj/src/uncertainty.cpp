#include "rauf/uncertainty.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>
#include <functional>
#include <string>

#include "rauf/errors.hpp"

namespace rauf {

void PolarSigmas::validate() const {
  if (!(sigma_range > 0.0) || !(sigma_azimuth > 0.0) || !(sigma_elevation > 0.0))
    throw ConfigError("sigmas: all standard deviations must be positive");
}

Eigen::Matrix3d propagation_jacobian(const PolarCoord& c) {
  const double ca = std::cos(c.azimuth), sa = std::sin(c.azimuth);
  const double cb = std::cos(c.elevation), sb = std::sin(c.elevation);
  const double r = c.range;
  Eigen::Matrix3d j;
  j << ca * cb, -r * sa * cb, -r * ca * sb,
       sa * cb,  r * ca * cb, -r * sa * sb,
       sb,       0.0,          r * cb;
  return j;
}

Covariance3 propagate_covariance(const PolarCoord& c, const PolarSigmas& s,
                                 bool* near_origin) {
  s.validate();
  const Eigen::Matrix3d j = propagation_jacobian(c);
  Covariance3 cov = j * s.variances().asDiagonal() * j.transpose();
  const bool degenerate = c.range < 1e-6;
  if (degenerate) cov += 1e-12 * Covariance3::Identity();
  if (near_origin) *near_origin = degenerate;
  // Symmetrize to scrub accumulation asymmetry from the triple product.
  cov = 0.5 * (cov + cov.transpose()).eval();
  return cov;
}

namespace {

Eigen::LLT<Eigen::Matrix3d> cholesky_or_throw(const Covariance3& cov,
                                              const char* what) {
  Eigen::LLT<Eigen::Matrix3d> llt(cov);
  if (llt.info() != Eigen::Success)
    throw DecompositionError(std::string(what) +
                             ": covariance is not positive definite");
  return llt;
}

double log_det_from(const Eigen::LLT<Eigen::Matrix3d>& llt) {
  const Eigen::Matrix3d l = llt.matrixL();
  return 2.0 * (std::log(l(0, 0)) + std::log(l(1, 1)) + std::log(l(2, 2)));
}

double pairwise_sum(const std::function<double(std::size_t)>& term,
                    std::size_t begin, std::size_t end) {
  const std::size_t n = end - begin;
  if (n == 0) return 0.0;
  if (n == 1) return term(begin);
  const std::size_t mid = begin + n / 2;
  return pairwise_sum(term, begin, mid) + pairwise_sum(term, mid, end);
}

}  // namespace

double mahalanobis_sq(const Eigen::Vector3d& eps, const Covariance3& cov) {
  const auto llt = cholesky_or_throw(cov, "mahalanobis_sq");
  // eps^T Sigma^-1 eps = ||L^-1 eps||^2
  const Eigen::Vector3d y = llt.matrixL().solve(eps);
  return y.squaredNorm();
}

double log_det(const Covariance3& cov) {
  return log_det_from(cholesky_or_throw(cov, "log_det"));
}

double nll_loss(std::span<const ResidualWithCovariance> terms) {
  auto one_term = [&](std::size_t i) -> double {
    Eigen::LLT<Eigen::Matrix3d> llt(terms[i].cov);
    if (llt.info() != Eigen::Success)
      throw DecompositionError("nll_loss: covariance of term " +
                               std::to_string(i) + " is not positive definite");
    const Eigen::Vector3d y = llt.matrixL().solve(terms[i].residual);
    return y.squaredNorm() + log_det_from(llt);
  };
  return pairwise_sum(one_term, 0, terms.size());
}

NllGradient nll_gradients(const NllTerm& term, const Eigen::Matrix3d& jacobian) {
  if (!term.residual.allFinite() || !term.log_variances.allFinite())
    throw ConfigError("nll_gradients: term must be finite");
  const Eigen::PartialPivLU<Eigen::Matrix3d> lu(jacobian);
  const double abs_det = std::abs(lu.determinant());
  if (!(abs_det > 0.0))
    throw DecompositionError("nll_gradients: singular Jacobian");
  const Eigen::Vector3d w = lu.solve(term.residual);
  const Eigen::Vector3d inv_var = (-term.log_variances.array()).exp().matrix();

  NllGradient g;
  g.value = (w.array().square() * inv_var.array()).sum() +
            2.0 * std::log(abs_det) + term.log_variances.sum();
  // d/dl_k = 1 (log det) - w_k^2 exp(-l_k) (Mahalanobis)
  g.wrt_log_variance =
      Eigen::Vector3d::Ones() -
      (w.array().square() * inv_var.array()).matrix();
  // d/deps = 2 Sigma^-1 eps = 2 J^-T (D^-1 w)
  const Eigen::PartialPivLU<Eigen::Matrix3d> lu_t(jacobian.transpose());
  g.wrt_residual =
      2.0 * lu_t.solve((inv_var.array() * w.array()).matrix().eval());
  return g;
}

}  // namespace rauf
