#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rauf/geometry.hpp"

namespace rauf {

/// Dense reference point cloud in the radar frame (meters).
using ReferenceCloud = std::vector<CartesianPoint>;

/// Per-cell point counts on the radar polar grid, range-major like RadarCube.
/// Binary occupancy is a thresholded view of the counts (count >= threshold).
struct OccupancyGrid {
  RadarIntrinsics intrinsics;
  std::vector<std::uint32_t> counts;

  std::size_t flat_index(std::size_t i_r, std::size_t i_a, std::size_t i_e) const {
    return (i_r * intrinsics.azimuth_bins + i_a) * intrinsics.elevation_bins + i_e;
  }
  std::uint32_t count(std::size_t i_r, std::size_t i_a, std::size_t i_e) const {
    return counts[flat_index(i_r, i_a, i_e)];
  }
  bool occupied(std::size_t i_r, std::size_t i_a, std::size_t i_e,
                std::uint32_t threshold = 1) const {
    return count(i_r, i_a, i_e) >= threshold;
  }
  std::size_t occupied_cells(std::uint32_t threshold = 1) const;

  /// Throws ConfigError when the count vector does not match the intrinsics.
  void validate() const;
};

/// Bins every cloud point into the polar cell containing it (half-open
/// [low, high) per axis; a point exactly on max_range is outside). Points
/// outside the field of view — including points too close to the origin to
/// carry angles — are skipped and tallied into *out_of_view when given.
/// Count conservation: sum of counts == number of in-view points.
OccupancyGrid voxelize_frustum(const ReferenceCloud& cloud,
                               const RadarIntrinsics& intr,
                               std::size_t* out_of_view = nullptr);

/// One point per cell with count >= threshold, at the cell's polar center
/// mapped to Cartesian, in range-major cell order.
ReferenceCloud grid_to_pointcloud(const OccupancyGrid& grid,
                                  std::uint32_t threshold = 1);

/// Height pre-filter: keeps points with z strictly above the cutoff.
ReferenceCloud remove_ground(const ReferenceCloud& cloud, double z_cutoff);

// Occupancy grid file: same header as the cube format with magic "ROCC" and
// a u8 payload of per-cell counts clamped to 255 (binary occupancy survives
// the clamp unchanged).
void write_occupancy(const std::filesystem::path& path, const OccupancyGrid& grid);
OccupancyGrid read_occupancy(const std::filesystem::path& path);

}  // namespace rauf
