#include "rauf/geometry.hpp"

#include <cmath>
#include <string>

#include "rauf/errors.hpp"

namespace rauf {

namespace {
constexpr double kOriginEpsilon = 1e-9;
}

void RadarIntrinsics::validate() const {
  if (range_bins < 1 || azimuth_bins < 1 || elevation_bins < 1)
    throw ConfigError("intrinsics: all bin counts must be >= 1");
  if (!(range_resolution > 0.0))
    throw ConfigError("intrinsics: range_resolution must be positive");
  if (!(azimuth_min < azimuth_max))
    throw ConfigError("intrinsics: azimuth_min must be < azimuth_max");
  if (!(elevation_min < elevation_max))
    throw ConfigError("intrinsics: elevation_min must be < elevation_max");
}

CartesianPoint polar_to_cartesian(const PolarCoord& c) {
  const double ca = std::cos(c.azimuth), sa = std::sin(c.azimuth);
  const double cb = std::cos(c.elevation), sb = std::sin(c.elevation);
  return {c.range * ca * cb, c.range * sa * cb, c.range * sb};
}

PolarCoord cartesian_to_polar(const CartesianPoint& p) {
  const double r = p.norm();
  if (r < kOriginEpsilon)
    throw DegenerateError("cartesian_to_polar: point at origin, angles undefined");
  return {r, std::atan2(p.y(), p.x()), std::asin(p.z() / r)};
}

Eigen::Vector3d direction_vector(double azimuth, double elevation) {
  const double cb = std::cos(elevation);
  return {std::cos(azimuth) * cb, std::sin(azimuth) * cb, std::sin(elevation)};
}

PolarCoord bin_to_polar(const RadarIntrinsics& intr, const BinIndex& bin) {
  return bin_to_polar(intr, bin.range, bin.azimuth, bin.elevation);
}

PolarCoord bin_to_polar(const RadarIntrinsics& intr, std::size_t i_r,
                        std::size_t i_a, std::size_t i_e) {
  if (i_r >= intr.range_bins || i_a >= intr.azimuth_bins ||
      i_e >= intr.elevation_bins)
    throw IndexError("bin_to_polar: index (" + std::to_string(i_r) + ", " +
                     std::to_string(i_a) + ", " + std::to_string(i_e) +
                     ") outside grid extents");
  PolarCoord c;
  c.range = (static_cast<double>(i_r) + 0.5) * intr.range_resolution;
  c.azimuth =
      intr.azimuth_min + (static_cast<double>(i_a) + 0.5) * intr.azimuth_bin_width();
  c.elevation = intr.elevation_min +
                (static_cast<double>(i_e) + 0.5) * intr.elevation_bin_width();
  return c;
}

std::optional<BinIndex> polar_to_bin(const RadarIntrinsics& intr,
                                     const PolarCoord& c) {
  if (c.range < 0.0) return std::nullopt;
  const double fr = c.range / intr.range_resolution;
  const double fa = (c.azimuth - intr.azimuth_min) / intr.azimuth_bin_width();
  const double fe =
      (c.elevation - intr.elevation_min) / intr.elevation_bin_width();
  if (fr < 0.0 || fa < 0.0 || fe < 0.0) return std::nullopt;
  const auto i_r = static_cast<std::size_t>(fr);
  const auto i_a = static_cast<std::size_t>(fa);
  const auto i_e = static_cast<std::size_t>(fe);
  if (i_r >= intr.range_bins || i_a >= intr.azimuth_bins ||
      i_e >= intr.elevation_bins)
    return std::nullopt;
  return BinIndex{i_r, i_a, i_e};
}

}  // namespace rauf
