#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "rauf/geometry.hpp"

namespace rauf {

/// Dense range x azimuth x elevation measurement tensor with an intensity
/// channel (linear power) and a Doppler channel (radial velocity, m/s).
/// Storage is range-major: index = (i_r * A + i_a) * E + i_e.
class RadarCube {
 public:
  RadarCube() = default;
  RadarCube(const RadarIntrinsics& intr, std::vector<float> intensity,
            std::vector<float> doppler);

  /// Zero-filled cube.
  explicit RadarCube(const RadarIntrinsics& intr);

  const RadarIntrinsics& intrinsics() const { return intr_; }

  std::size_t flat_index(std::size_t i_r, std::size_t i_a, std::size_t i_e) const {
    return (i_r * intr_.azimuth_bins + i_a) * intr_.elevation_bins + i_e;
  }

  float intensity(std::size_t i_r, std::size_t i_a, std::size_t i_e) const {
    return intensity_[flat_index(i_r, i_a, i_e)];
  }
  float doppler(std::size_t i_r, std::size_t i_a, std::size_t i_e) const {
    return doppler_[flat_index(i_r, i_a, i_e)];
  }
  float& intensity(std::size_t i_r, std::size_t i_a, std::size_t i_e) {
    return intensity_[flat_index(i_r, i_a, i_e)];
  }
  float& doppler(std::size_t i_r, std::size_t i_a, std::size_t i_e) {
    return doppler_[flat_index(i_r, i_a, i_e)];
  }

  const std::vector<float>& intensity_data() const { return intensity_; }
  const std::vector<float>& doppler_data() const { return doppler_; }

  /// Throws ConfigError when extents mismatch the intrinsics or any
  /// intensity value is negative.
  void validate() const;

 private:
  RadarIntrinsics intr_;
  std::vector<float> intensity_;
  std::vector<float> doppler_;
};

// Binary cube file, little-endian:
//   magic "RCUB", u32 version=1, u32 R, u32 A, u32 E,
//   f64 range_resolution, f64 azimuth_min, f64 azimuth_max,
//   f64 elevation_min, f64 elevation_max,
//   R*A*E f32 intensity (range-major, then azimuth, then elevation),
//   R*A*E f32 doppler.
void write_cube(const std::filesystem::path& path, const RadarCube& cube);
RadarCube read_cube(const std::filesystem::path& path);

/// Per-bin provenance labels produced by the simulator.
enum class BinLabel : std::uint8_t { Noise = 0, True = 1, Ghost = 2 };

/// Label grid file: same header as the cube with magic "RLBL" and a u8
/// payload of BinLabel values.
void write_labels(const std::filesystem::path& path, const RadarIntrinsics& intr,
                  const std::vector<BinLabel>& labels);
std::pair<RadarIntrinsics, std::vector<BinLabel>> read_labels(
    const std::filesystem::path& path);

namespace detail {
// Shared header codec for the grid file family (RCUB / RLBL / ROCC).
void write_grid_header(std::ostream& out, const char magic[4],
                       const RadarIntrinsics& intr);
RadarIntrinsics read_grid_header(std::istream& in, const char expected_magic[4],
                                 const std::filesystem::path& path);
}  // namespace detail

}  // namespace rauf
