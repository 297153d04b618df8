#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "rauf/geometry.hpp"
#include "rauf/uncertainty.hpp"

namespace rauf {

using Vector6d = Eigen::Matrix<double, 6, 1>;

/// Proper rigid motion: p -> rotation * p + translation.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  CartesianPoint apply(const CartesianPoint& p) const {
    return rotation * p + translation;
  }
  RigidTransform inverse() const {
    return {rotation.transpose(), -(rotation.transpose() * translation)};
  }
  /// this ∘ other: applies other first.
  RigidTransform compose(const RigidTransform& other) const {
    return {rotation * other.rotation,
            rotation * other.translation + translation};
  }

  /// Throws ConfigError when the rotation is not orthonormal with
  /// determinant +1 within 1e-9.
  void validate() const;
};

/// [v]_x, the skew-symmetric cross-product matrix.
Eigen::Matrix3d skew(const Eigen::Vector3d& v);

/// Rodrigues rotation exp([omega]_x).
Eigen::Matrix3d so3_exp(const Eigen::Vector3d& omega);

/// Left-multiplicative retraction of an se(3) update (omega, delta_t):
/// R <- exp([omega]_x) R,  t <- exp([omega]_x) t + delta_t, with the rotation
/// re-orthonormalized through an SVD projection.
RigidTransform se3_apply(const RigidTransform& transform, const Vector6d& update);

/// One Gauss-Newton step for residuals r_i with covariances C_i and point
/// Jacobians J_i = dr_i/d(omega, t): solves the 6x6 normal equations by
/// Cholesky. robust_scale > 0 applies Huber reweighting on the Mahalanobis
/// norm. Throws DegenerateError on fewer than 3 residuals and
/// DecompositionError (with a conditioning diagnostic) when the normal
/// matrix is not positive definite.
Vector6d se3_step(std::span<const Eigen::Vector3d> residuals,
                  std::span<const Covariance3> covariances,
                  std::span<const Eigen::Matrix<double, 3, 6>> jacobians,
                  double robust_scale = 0.0);

struct RegistrationConfig {
  std::size_t max_iterations = 50;
  double convergence_tol = 1e-10;        // se(3) update norm
  double max_correspondence_dist = 2.0;  // meters, mean-to-mean
  double robust_loss_scale = 0.0;        // Huber scale; 0 disables

  void validate() const;
};

struct RegistrationResult {
  RigidTransform transform;
  double final_cost = 0.0;  // sum of Mahalanobis-squared residuals
  std::size_t iterations = 0;
  std::size_t correspondences = 0;       // at the last iteration
  std::vector<double> cost_history;      // cost before each step
};

/// Iterative closest point with per-point anisotropic covariances:
/// alternates nearest-neighbor correspondence (mean-to-mean, capped at
/// max_correspondence_dist) with one Gauss-Newton step minimizing
/// sum r_i^T C_i^-1 r_i, where r_i = T(p_i) - q_i and
/// C_i = R Sigma_src,i R^T + Sigma_tgt,i. Identity initialization.
/// Throws DegenerateError when fewer than 3 points or correspondences
/// survive.
RegistrationResult register_uncertain(std::span<const UncertainPoint> source,
                                      std::span<const UncertainPoint> target,
                                      const RegistrationConfig& cfg = {});

}  // namespace rauf
