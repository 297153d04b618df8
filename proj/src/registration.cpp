#include "rauf/registration.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "rauf/errors.hpp"
#include "rauf/metrics.hpp"

namespace rauf {

void RigidTransform::validate() const {
  if ((rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
          .cwiseAbs()
          .maxCoeff() > 1e-9 ||
      std::abs(rotation.determinant() - 1.0) > 1e-9)
    throw ConfigError("transform: rotation is not a proper orthonormal matrix");
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),  //
      v.z(), 0.0, -v.x(),   //
      -v.y(), v.x(), 0.0;
  return m;
}

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  const Eigen::Matrix3d s = skew(omega);
  if (theta < 1e-12)
    return Eigen::Matrix3d::Identity() + s + 0.5 * s * s;  // series tail
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Eigen::Matrix3d::Identity() + a * s + b * s * s;
}

namespace {

Eigen::Matrix3d orthonormalized(const Eigen::Matrix3d& r) {
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d out = svd.matrixU() * svd.matrixV().transpose();
  if (out.determinant() < 0.0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    out = u * svd.matrixV().transpose();
  }
  return out;
}

}  // namespace

RigidTransform se3_apply(const RigidTransform& transform, const Vector6d& update) {
  const Eigen::Matrix3d delta = so3_exp(update.head<3>());
  RigidTransform out;
  out.rotation = orthonormalized(delta * transform.rotation);
  out.translation = delta * transform.translation + update.tail<3>();
  return out;
}

Vector6d se3_step(std::span<const Eigen::Vector3d> residuals,
                  std::span<const Covariance3> covariances,
                  std::span<const Eigen::Matrix<double, 3, 6>> jacobians,
                  double robust_scale) {
  const std::size_t n = residuals.size();
  if (covariances.size() != n || jacobians.size() != n)
    throw ConfigError("step: residual, covariance, and Jacobian counts differ");
  if (n < 3)
    throw DegenerateError("step: at least 3 residuals required, got " +
                          std::to_string(n));

  Eigen::Matrix<double, 6, 6> h = Eigen::Matrix<double, 6, 6>::Zero();
  Vector6d b = Vector6d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::LLT<Covariance3> llt(covariances[i]);
    if (llt.info() != Eigen::Success)
      throw DecompositionError("step: covariance " + std::to_string(i) +
                               " is not positive definite");
    const Eigen::Vector3d whitened = llt.matrixL().solve(residuals[i]);
    double weight = 1.0;
    if (robust_scale > 0.0) {
      const double mahalanobis = whitened.norm();
      if (mahalanobis > robust_scale) weight = robust_scale / mahalanobis;
    }
    const Eigen::Matrix<double, 3, 6> wj = llt.matrixL().solve(
        Eigen::Matrix<double, 3, 6>(jacobians[i]));
    h.noalias() += weight * wj.transpose() * wj;
    b.noalias() -= weight * wj.transpose() * whitened;
  }

  const Eigen::LLT<Eigen::Matrix<double, 6, 6>> llt(h);
  if (llt.info() != Eigen::Success) {
    const Eigen::JacobiSVD<Eigen::Matrix<double, 6, 6>> svd(h);
    throw DecompositionError(
        "step: singular normal equations, singular values " +
        std::to_string(svd.singularValues().maxCoeff()) + " .. " +
        std::to_string(svd.singularValues().minCoeff()));
  }
  return llt.solve(b);
}

void RegistrationConfig::validate() const {
  if (max_iterations == 0)
    throw ConfigError("registration: max_iterations must be positive");
  if (!(convergence_tol > 0.0))
    throw ConfigError("registration: convergence_tol must be positive");
  if (!(max_correspondence_dist > 0.0))
    throw ConfigError("registration: max_correspondence_dist must be positive");
  if (!(robust_loss_scale >= 0.0))
    throw ConfigError("registration: robust_loss_scale must be non-negative");
}

RegistrationResult register_uncertain(std::span<const UncertainPoint> source,
                                      std::span<const UncertainPoint> target,
                                      const RegistrationConfig& cfg) {
  cfg.validate();
  if (source.size() < 3 || target.size() < 3)
    throw DegenerateError("registration: both clouds need at least 3 points");

  std::vector<CartesianPoint> target_means(target.size());
  for (std::size_t i = 0; i < target.size(); ++i)
    target_means[i] = target[i].mean;
  const PointIndex target_index(target_means, cfg.max_correspondence_dist);

  const double cap_sq =
      cfg.max_correspondence_dist * cfg.max_correspondence_dist;

  RegistrationResult result;
  std::vector<Eigen::Vector3d> residuals;
  std::vector<Covariance3> covariances;
  std::vector<Eigen::Matrix<double, 3, 6>> point_jacobians;

  for (std::size_t iter = 0; iter < cfg.max_iterations; ++iter) {
    residuals.clear();
    covariances.clear();
    point_jacobians.clear();

    double cost = 0.0;
    for (const UncertainPoint& src : source) {
      const CartesianPoint moved = result.transform.apply(src.mean);
      const auto [j, d_sq] = target_index.nearest(moved);
      if (d_sq > cap_sq) continue;

      const Eigen::Vector3d r = moved - target[j].mean;
      const Covariance3 c = result.transform.rotation * src.cov *
                                result.transform.rotation.transpose() +
                            target[j].cov;
      Eigen::Matrix<double, 3, 6> jac;
      jac.block<3, 3>(0, 0) = -skew(moved);
      jac.block<3, 3>(0, 3) = Eigen::Matrix3d::Identity();

      residuals.push_back(r);
      covariances.push_back(c);
      point_jacobians.push_back(jac);
      cost += mahalanobis_sq(r, c);
    }
    if (residuals.size() < 3)
      throw DegenerateError(
          "registration: fewer than 3 correspondences within " +
          std::to_string(cfg.max_correspondence_dist) + " m at iteration " +
          std::to_string(iter));

    result.cost_history.push_back(cost);
    result.correspondences = residuals.size();

    const Vector6d update = se3_step(residuals, covariances, point_jacobians,
                                     cfg.robust_loss_scale);
    result.transform = se3_apply(result.transform, update);
    result.iterations = iter + 1;
    if (update.norm() < cfg.convergence_tol) break;
  }

  // final cost under the converged correspondences
  double cost = 0.0;
  std::size_t matched = 0;
  for (const UncertainPoint& src : source) {
    const CartesianPoint moved = result.transform.apply(src.mean);
    const auto [j, d_sq] = target_index.nearest(moved);
    if (d_sq > cap_sq) continue;
    const Covariance3 c = result.transform.rotation * src.cov *
                              result.transform.rotation.transpose() +
                          target[j].cov;
    cost += mahalanobis_sq(moved - target[j].mean, c);
    ++matched;
  }
  result.final_cost = cost;
  result.correspondences = matched;
  return result;
}

}  // namespace rauf
