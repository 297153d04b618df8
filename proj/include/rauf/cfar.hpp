#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rauf/cube.hpp"
#include "rauf/geometry.hpp"

namespace rauf {

/// Ordered-statistics CFAR parameters. Counts are per side of the cell
/// under test.
struct CfarConfig {
  std::size_t guard_cells = 2;
  std::size_t train_cells = 8;
  double os_rank_fraction = 0.75;  // in (0, 1]
  double scale_factor = 3.0;       // threshold multiplier, > 0

  void validate() const;
};

/// One detected cell with its polar coordinate and channel values.
struct PolarDetection {
  PolarCoord coord;
  double intensity = 0.0;  // linear power
  double doppler = 0.0;    // m/s
  std::optional<BinIndex> source_bins;
};

/// OS-CFAR along one power profile. Cell i fires when its value exceeds
/// scale_factor times the k-th smallest of the training cells, where the
/// training window is train_cells on each side beyond guard_cells and
/// k = ceil(os_rank_fraction * window size). Windows truncated at the
/// profile edges keep their rank fraction over the cells actually present.
/// Throws ConfigError when the profile is shorter than
/// 2 * (guard + train) + 1.
std::vector<std::uint8_t> os_cfar_1d(std::span<const double> profile,
                                     const CfarConfig& cfg);

/// Runs os_cfar_1d along the range axis of every (azimuth, elevation)
/// column, reads the Doppler channel at detected bins, and drops detections
/// with intensity below min_intensity. Output is sorted by
/// (i_a, i_e, i_r). Columns are processed in parallel up to thread_budget().
std::vector<PolarDetection> detect_cube(const RadarCube& cube,
                                        const CfarConfig& cfg,
                                        double min_intensity = 0.0);

}  // namespace rauf
