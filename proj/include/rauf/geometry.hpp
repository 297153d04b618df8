#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>

namespace rauf {

// Coordinate frame: x = boresight, y = left, z = up. Azimuth is positive
// toward +y (counter-clockwise seen from above), elevation positive up.

using CartesianPoint = Eigen::Vector3d;

/// Spherical radar coordinate: range r, azimuth alpha, elevation beta.
struct PolarCoord {
  double range = 0.0;      // meters
  double azimuth = 0.0;    // radians
  double elevation = 0.0;  // radians
};

/// Measurement-grid geometry of one radar configuration.
struct RadarIntrinsics {
  std::size_t range_bins = 0;
  std::size_t azimuth_bins = 0;
  std::size_t elevation_bins = 0;
  double range_resolution = 0.0;  // meters per bin
  double azimuth_min = 0.0;       // radians
  double azimuth_max = 0.0;
  double elevation_min = 0.0;
  double elevation_max = 0.0;

  double max_range() const {
    return static_cast<double>(range_bins) * range_resolution;
  }
  double azimuth_bin_width() const {
    return (azimuth_max - azimuth_min) / static_cast<double>(azimuth_bins);
  }
  double elevation_bin_width() const {
    return (elevation_max - elevation_min) / static_cast<double>(elevation_bins);
  }
  std::size_t cell_count() const {
    return range_bins * azimuth_bins * elevation_bins;
  }

  /// Throws ConfigError when any bin count is zero, the range resolution is
  /// not positive, or an angle span is empty.
  void validate() const;
};

struct BinIndex {
  std::size_t range = 0;
  std::size_t azimuth = 0;
  std::size_t elevation = 0;

  bool operator==(const BinIndex&) const = default;
};

/// (r cos a cos b, r sin a cos b, r sin b).
CartesianPoint polar_to_cartesian(const PolarCoord& c);

/// Inverse mapping; throws DegenerateError for points within 1e-9 of the
/// origin where both angles are undefined.
PolarCoord cartesian_to_polar(const CartesianPoint& p);

/// Unit vector toward (azimuth, elevation); equals polar_to_cartesian at r=1.
Eigen::Vector3d direction_vector(double azimuth, double elevation);

/// Center coordinate of a grid cell. Throws IndexError for indices outside
/// the intrinsics extents.
PolarCoord bin_to_polar(const RadarIntrinsics& intr, const BinIndex& bin);
PolarCoord bin_to_polar(const RadarIntrinsics& intr, std::size_t i_r,
                        std::size_t i_a, std::size_t i_e);

/// Cell containing a polar coordinate under the half-open [low, high)
/// convention per bin; nullopt when outside the field of view or beyond
/// max_range (a point exactly on max_range is out of range).
std::optional<BinIndex> polar_to_bin(const RadarIntrinsics& intr,
                                     const PolarCoord& c);

}  // namespace rauf
