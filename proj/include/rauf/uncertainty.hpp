#pragma once

#include <Eigen/Core>

#include <span>
#include <vector>

#include "rauf/geometry.hpp"

namespace rauf {

/// Per-axis measurement noise in polar space, as standard deviations.
struct PolarSigmas {
  double sigma_range = 0.0;      // meters
  double sigma_azimuth = 0.0;    // radians
  double sigma_elevation = 0.0;  // radians

  void validate() const;
  Eigen::Vector3d variances() const {
    return {sigma_range * sigma_range, sigma_azimuth * sigma_azimuth,
            sigma_elevation * sigma_elevation};
  }
};

/// Symmetric positive definite 3x3 position covariance, m^2.
using Covariance3 = Eigen::Matrix3d;

/// Cartesian position with its anisotropic covariance.
struct UncertainPoint {
  CartesianPoint mean = CartesianPoint::Zero();
  Covariance3 cov = Covariance3::Identity();
};

/// Jacobian of polar_to_cartesian at c, columns d/dr, d/dalpha, d/dbeta:
///   [ cos a cos b   -r sin a cos b   -r cos a sin b ]
///   [ sin a cos b    r cos a cos b   -r sin a sin b ]
///   [ sin b          0                r cos b       ]
Eigen::Matrix3d propagation_jacobian(const PolarCoord& c);

/// First-order propagation Sigma = J diag(sr^2, sa^2, sb^2) J^T. For
/// near-origin coordinates (r < 1e-6) the Jacobian is singular; 1e-12 * I
/// jitter is added and *near_origin (when given) is set.
Covariance3 propagate_covariance(const PolarCoord& c, const PolarSigmas& s,
                                 bool* near_origin = nullptr);

/// eps^T Sigma^-1 eps via Cholesky triangular solves. Throws
/// DecompositionError when cov is not positive definite.
double mahalanobis_sq(const Eigen::Vector3d& eps, const Covariance3& cov);

/// log det via the Cholesky factor diagonal. Throws DecompositionError.
double log_det(const Covariance3& cov);

struct ResidualWithCovariance {
  Eigen::Vector3d residual = Eigen::Vector3d::Zero();
  Covariance3 cov = Covariance3::Identity();
};

/// Heteroscedastic Gaussian loss: sum_i ( ||eps_i||^2_Sigma_i + log det
/// Sigma_i ), accumulated by pairwise reduction. A non-PD covariance raises
/// DecompositionError naming the offending term index.
double nll_loss(std::span<const ResidualWithCovariance> terms);

/// One loss term in the log-variance parameterization: the polar variances
/// are exp(log_variances) and Sigma = J exp-diag J^T with J fixed.
struct NllTerm {
  Eigen::Vector3d residual = Eigen::Vector3d::Zero();
  Eigen::Vector3d log_variances = Eigen::Vector3d::Zero();
};

struct NllGradient {
  double value = 0.0;
  Eigen::Vector3d wrt_residual = Eigen::Vector3d::Zero();
  Eigen::Vector3d wrt_log_variance = Eigen::Vector3d::Zero();
};

/// Analytic value and gradient of ||eps||^2_Sigma + log det Sigma for one
/// term. With w = J^-1 eps the term is
///   sum_k w_k^2 exp(-l_k) + 2 log |det J| + sum_k l_k,
/// so the log-det contribution to each d/dl_k is exactly 1.
NllGradient nll_gradients(const NllTerm& term, const Eigen::Matrix3d& jacobian);

}  // namespace rauf
