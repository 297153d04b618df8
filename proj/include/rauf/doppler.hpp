#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

#include "rauf/cfar.hpp"
#include "rauf/geometry.hpp"

namespace rauf {

/// Radar ego-velocity in the radar frame, m/s.
using EgoVelocity = Eigen::Vector3d;

constexpr double kDefaultMaxEgoSpeed = 50.0;  // m/s

/// Throws ConfigError when v is not finite or exceeds v_max.
void validate_ego_velocity(const EgoVelocity& v,
                           double v_max = kDefaultMaxEgoSpeed);

/// Radial velocity of a stationary scatterer seen from a radar moving at v.
/// Sign convention: positive Doppler = scatterer receding, so forward motion
/// yields negative Doppler ahead. Returns -<v, direction_vector(a, b)>.
double expected_doppler(const EgoVelocity& v, double azimuth, double elevation);

struct ConsistencyVerdict {
  std::size_t detection_index = 0;
  double predicted_doppler = 0.0;  // m/s
  double residual = 0.0;           // measured - predicted, m/s
  bool inlier = false;
};

/// Flags each detection by |measured - expected| <= threshold. Output order
/// matches input order. Throws ConfigError for a non-positive threshold.
std::vector<ConsistencyVerdict> consistency_filter(
    std::span<const PolarDetection> detections, const EgoVelocity& v,
    double threshold);

/// Least-squares ego-velocity from the stationary-scatterer model
/// d_i = -<v, u_i>, solved by SVD. Throws DegenerateError (reporting the
/// smallest singular value) when the stacked directions do not span 3-space.
EgoVelocity estimate_ego_velocity_ls(std::span<const PolarDetection> detections);

struct RansacConfig {
  std::size_t iterations = 100;
  double inlier_threshold = 0.2;  // m/s
  std::size_t min_sample = 3;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RansacResult {
  EgoVelocity velocity = EgoVelocity::Zero();
  std::vector<std::uint8_t> inlier_mask;  // one flag per input detection
  std::size_t inlier_count = 0;
};

/// RANSAC over minimal direction samples; the best model maximizes inlier
/// count with inlier residual RMS as tie-break, then is refit by
/// estimate_ego_velocity_ls on its inlier set. Bit-reproducible for a fixed
/// seed. Throws Error when no iteration produces a sample with spanning
/// geometry.
RansacResult estimate_ego_velocity_ransac(
    std::span<const PolarDetection> detections, const RansacConfig& cfg);

}  // namespace rauf
