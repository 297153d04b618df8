#include "rauf/cfar.hpp"

#include <algorithm>
#include <cmath>

#include "rauf/errors.hpp"
#include "rauf/parallel.hpp"

namespace rauf {

void CfarConfig::validate() const {
  if (train_cells < 1) throw ConfigError("cfar: train_cells must be >= 1");
  if (!(os_rank_fraction > 0.0 && os_rank_fraction <= 1.0))
    throw ConfigError("cfar: os_rank_fraction must be in (0, 1]");
  if (!(scale_factor > 0.0))
    throw ConfigError("cfar: scale_factor must be positive");
}

std::vector<std::uint8_t> os_cfar_1d(std::span<const double> profile,
                                     const CfarConfig& cfg) {
  cfg.validate();
  const std::size_t n = profile.size();
  if (n <= 2 * (cfg.guard_cells + cfg.train_cells))
    throw ConfigError("cfar: profile length must exceed 2 * (guard + train)");

  std::vector<std::uint8_t> mask(n, 0);
  std::vector<double> window;
  window.reserve(2 * cfg.train_cells);
  const auto g = static_cast<std::ptrdiff_t>(cfg.guard_cells);
  const auto t = static_cast<std::ptrdiff_t>(cfg.train_cells);
  const auto len = static_cast<std::ptrdiff_t>(n);

  for (std::ptrdiff_t i = 0; i < len; ++i) {
    window.clear();
    for (std::ptrdiff_t j = i - g - t; j <= i - g - 1; ++j)
      if (j >= 0) window.push_back(profile[static_cast<std::size_t>(j)]);
    for (std::ptrdiff_t j = i + g + 1; j <= i + g + t; ++j)
      if (j < len) window.push_back(profile[static_cast<std::size_t>(j)]);

    // k-th smallest, k from the rank fraction over the cells present.
    std::size_t k = static_cast<std::size_t>(
        std::ceil(cfg.os_rank_fraction * static_cast<double>(window.size())));
    k = std::clamp<std::size_t>(k, 1, window.size());
    std::nth_element(window.begin(), window.begin() + (k - 1), window.end());
    const double rank_value = window[k - 1];
    if (profile[static_cast<std::size_t>(i)] > cfg.scale_factor * rank_value)
      mask[static_cast<std::size_t>(i)] = 1;
  }
  return mask;
}

std::vector<PolarDetection> detect_cube(const RadarCube& cube,
                                        const CfarConfig& cfg,
                                        double min_intensity) {
  cfg.validate();
  const RadarIntrinsics& intr = cube.intrinsics();
  if (intr.range_bins <= 2 * (cfg.guard_cells + cfg.train_cells))
    throw ConfigError("cfar: range_bins must exceed 2 * (guard + train)");

  const std::size_t columns = intr.azimuth_bins * intr.elevation_bins;
  std::vector<std::vector<PolarDetection>> per_column(columns);

  parallel_for(columns, [&](std::size_t col) {
    const std::size_t i_a = col / intr.elevation_bins;
    const std::size_t i_e = col % intr.elevation_bins;
    std::vector<double> profile(intr.range_bins);
    for (std::size_t i_r = 0; i_r < intr.range_bins; ++i_r)
      profile[i_r] = cube.intensity(i_r, i_a, i_e);
    const auto mask = os_cfar_1d(profile, cfg);
    for (std::size_t i_r = 0; i_r < intr.range_bins; ++i_r) {
      if (!mask[i_r]) continue;
      const double intensity = profile[i_r];
      if (intensity < min_intensity || !(intensity > 0.0)) continue;
      PolarDetection det;
      det.coord = bin_to_polar(intr, i_r, i_a, i_e);
      det.intensity = intensity;
      det.doppler = cube.doppler(i_r, i_a, i_e);
      det.source_bins = BinIndex{i_r, i_a, i_e};
      per_column[col].push_back(det);
    }
  });

  std::vector<PolarDetection> detections;
  for (auto& column : per_column)
    detections.insert(detections.end(), column.begin(), column.end());
  return detections;
}

}  // namespace rauf
