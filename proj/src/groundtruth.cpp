#include "rauf/groundtruth.hpp"

#include <algorithm>
#include <fstream>

#include "rauf/cube.hpp"
#include "rauf/errors.hpp"

namespace rauf {

std::size_t OccupancyGrid::occupied_cells(std::uint32_t threshold) const {
  return static_cast<std::size_t>(
      std::count_if(counts.begin(), counts.end(),
                    [threshold](std::uint32_t c) { return c >= threshold; }));
}

void OccupancyGrid::validate() const {
  intrinsics.validate();
  if (counts.size() != intrinsics.cell_count())
    throw ConfigError("occupancy: count extent does not match intrinsics");
}

OccupancyGrid voxelize_frustum(const ReferenceCloud& cloud,
                               const RadarIntrinsics& intr,
                               std::size_t* out_of_view) {
  intr.validate();
  OccupancyGrid grid{intr, std::vector<std::uint32_t>(intr.cell_count(), 0)};
  std::size_t skipped = 0;
  for (const CartesianPoint& p : cloud) {
    // points at the origin have no angles; treat them as out of view
    if (p.norm() < 1e-9) {
      ++skipped;
      continue;
    }
    if (const auto bin = polar_to_bin(intr, cartesian_to_polar(p)))
      ++grid.counts[grid.flat_index(bin->range, bin->azimuth, bin->elevation)];
    else
      ++skipped;
  }
  if (out_of_view) *out_of_view = skipped;
  return grid;
}

ReferenceCloud grid_to_pointcloud(const OccupancyGrid& grid,
                                  std::uint32_t threshold) {
  grid.validate();
  ReferenceCloud cloud;
  cloud.reserve(grid.occupied_cells(threshold));
  const RadarIntrinsics& intr = grid.intrinsics;
  for (std::size_t i_r = 0; i_r < intr.range_bins; ++i_r)
    for (std::size_t i_a = 0; i_a < intr.azimuth_bins; ++i_a)
      for (std::size_t i_e = 0; i_e < intr.elevation_bins; ++i_e)
        if (grid.occupied(i_r, i_a, i_e, threshold))
          cloud.push_back(polar_to_cartesian(bin_to_polar(intr, i_r, i_a, i_e)));
  return cloud;
}

ReferenceCloud remove_ground(const ReferenceCloud& cloud, double z_cutoff) {
  ReferenceCloud kept;
  kept.reserve(cloud.size());
  std::copy_if(cloud.begin(), cloud.end(), std::back_inserter(kept),
               [z_cutoff](const CartesianPoint& p) { return p.z() > z_cutoff; });
  return kept;
}

void write_occupancy(const std::filesystem::path& path,
                     const OccupancyGrid& grid) {
  grid.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  detail::write_grid_header(out, "ROCC", grid.intrinsics);
  for (const std::uint32_t c : grid.counts) {
    const auto byte = static_cast<char>(std::min<std::uint32_t>(c, 255));
    out.write(&byte, 1);
  }
  if (!out) throw IoError("failed writing " + path.string());
}

OccupancyGrid read_occupancy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const RadarIntrinsics intr = detail::read_grid_header(in, "ROCC", path);
  std::vector<std::uint8_t> bytes(intr.cell_count());
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!in) throw IoError(path.string() + ": truncated payload");
  OccupancyGrid grid{intr, std::vector<std::uint32_t>(bytes.begin(), bytes.end())};
  return grid;
}

}  // namespace rauf
