#include "rauf/sim.hpp"

#include <algorithm>
#include <cmath>

#include "rauf/errors.hpp"
#include "rauf/rng.hpp"

namespace rauf {

namespace {

// Child stream salts; fixed so renders and samples never share draws.
constexpr std::uint64_t kFloorStream = 0x466c6f6f72ULL;    // "Floor"
constexpr std::uint64_t kClutterStream = 0x436c7474ULL;    // "Cltt"
constexpr std::uint64_t kSampleStream = 0x53616d70ULL;     // "Samp"

// Clutter bins carry an arbitrary radial velocity, not the kinematic one.
constexpr double kClutterDopplerSpan = 3.0;  // m/s, uniform +/-

struct Emitter {
  PolarCoord coord;
  double reflectivity = 0.0;
  double doppler = 0.0;
  BinLabel label = BinLabel::Noise;
};

std::vector<Emitter> scene_emitters(const Scene& scene) {
  std::vector<Emitter> emitters;
  emitters.reserve(scene.scatterers.size() + scene.ghosts.size());
  for (const auto& s : scene.scatterers) {
    Emitter e;
    e.coord = cartesian_to_polar(s.position);
    e.reflectivity = s.reflectivity;
    e.doppler =
        expected_doppler(scene.ego_velocity, e.coord.azimuth, e.coord.elevation);
    e.label = BinLabel::True;
    emitters.push_back(e);
  }
  for (const auto& g : scene.ghosts) {
    Emitter e;
    e.coord = cartesian_to_polar(g.position);
    e.reflectivity = g.reflectivity;
    e.doppler =
        expected_doppler(scene.ego_velocity, e.coord.azimuth, e.coord.elevation) +
        g.doppler_offset;
    e.label = BinLabel::Ghost;
    emitters.push_back(e);
  }
  return emitters;
}

}  // namespace

void NoiseSpec::validate() const {
  sigmas.validate();
  if (!(noise_floor >= 0.0))
    throw ConfigError("noise: noise_floor must be non-negative");
  if (!(spread_range_bins > 0.0) || !(spread_azimuth_bins > 0.0) ||
      !(spread_elevation_bins > 0.0))
    throw ConfigError("noise: point spread widths must be positive");
}

Scene generate_scene(std::size_t n_scatterers, std::size_t n_ghosts,
                     double v_max, const RadarIntrinsics& intr,
                     std::uint64_t seed) {
  intr.validate();
  if (!(v_max >= 0.0)) throw ConfigError("generate_scene: v_max must be >= 0");
  const double max_range = intr.max_range();
  if (max_range <= 1.0)
    throw ConfigError("generate_scene: max_range must exceed the 1 m standoff");

  Rng rng(seed);
  Scene scene;
  scene.seed = seed;

  // Ego velocity: uniform direction, uniform speed in [0, v_max].
  const double az = rng.uniform(0.0, 2.0 * M_PI);
  const double cos_el = rng.uniform(-1.0, 1.0);
  const double el = std::asin(cos_el);
  scene.ego_velocity = rng.uniform(0.0, v_max) * direction_vector(az, el);

  scene.scatterers.reserve(n_scatterers);
  for (std::size_t i = 0; i < n_scatterers; ++i) {
    PolarCoord c;
    c.range = rng.uniform(1.0, max_range);
    c.azimuth = rng.uniform(intr.azimuth_min, intr.azimuth_max);
    c.elevation = rng.uniform(intr.elevation_min, intr.elevation_max);
    Scatterer s;
    s.position = polar_to_cartesian(c);
    s.reflectivity = rng.uniform(kMinReflectivity, kMaxReflectivity);
    scene.scatterers.push_back(s);
  }

  scene.ghosts.reserve(n_ghosts);
  const double range_high = max_range - 0.5 * intr.range_resolution;
  for (std::size_t i = 0; i < n_ghosts; ++i) {
    PolarCoord c;
    if (!scene.scatterers.empty()) {
      const auto parent = rng.uniform_index(scene.scatterers.size());
      c = cartesian_to_polar(scene.scatterers[parent].position);
      // mirror the range across the usable span, staying on the parent ray
      c.range = std::clamp(1.0 + max_range - c.range, 1.0, range_high);
    } else {
      c.range = rng.uniform(1.0, max_range);
      c.azimuth = rng.uniform(intr.azimuth_min, intr.azimuth_max);
      c.elevation = rng.uniform(intr.elevation_min, intr.elevation_max);
    }
    Ghost g;
    g.position = polar_to_cartesian(c);
    const double magnitude =
        rng.uniform(kMinGhostDopplerOffset, kMaxGhostDopplerOffset);
    g.doppler_offset = rng.uniform01() < 0.5 ? magnitude : -magnitude;
    g.reflectivity = rng.uniform(kMinReflectivity, kMaxReflectivity);
    scene.ghosts.push_back(g);
  }
  return scene;
}

RenderedCube render_cube(const Scene& scene, const RadarIntrinsics& intr,
                         const NoiseSpec& noise) {
  intr.validate();
  noise.validate();

  RenderedCube out{RadarCube(intr),
                   std::vector<BinLabel>(intr.cell_count(), BinLabel::Noise)};
  RadarCube& cube = out.cube;

  const Rng master(scene.seed);

  // Clutter floor first so emitter footprints sit on top of it.
  if (noise.noise_floor > 0.0) {
    Rng floor_rng = master.derive(kFloorStream);
    Rng clutter_rng = master.derive(kClutterStream);
    for (std::size_t i_r = 0; i_r < intr.range_bins; ++i_r)
      for (std::size_t i_a = 0; i_a < intr.azimuth_bins; ++i_a)
        for (std::size_t i_e = 0; i_e < intr.elevation_bins; ++i_e) {
          cube.intensity(i_r, i_a, i_e) =
              static_cast<float>(floor_rng.exponential(noise.noise_floor));
          cube.doppler(i_r, i_a, i_e) = static_cast<float>(
              clutter_rng.uniform(-kClutterDopplerSpan, kClutterDopplerSpan));
        }
  }

  // Strongest footprint contribution so far, per bin; decides which emitter
  // owns the bin's Doppler value.
  std::vector<float> dominant(intr.cell_count(), 0.0f);

  const double half_width_r = std::max(1.0, std::ceil(5.0 * noise.spread_range_bins));
  const double half_width_a =
      std::max(1.0, std::ceil(5.0 * noise.spread_azimuth_bins));
  const double half_width_e =
      std::max(1.0, std::ceil(5.0 * noise.spread_elevation_bins));

  for (const Emitter& e : scene_emitters(scene)) {
    // fractional bin-center coordinates of the emitter
    const double u_r = e.coord.range / intr.range_resolution - 0.5;
    const double u_a =
        (e.coord.azimuth - intr.azimuth_min) / intr.azimuth_bin_width() - 0.5;
    const double u_e = (e.coord.elevation - intr.elevation_min) /
                           intr.elevation_bin_width() - 0.5;

    const auto lo = [](double u, double hw) {
      return static_cast<std::ptrdiff_t>(std::floor(u - hw));
    };
    const auto hi = [](double u, double hw) {
      return static_cast<std::ptrdiff_t>(std::ceil(u + hw));
    };

    for (std::ptrdiff_t i_r = std::max<std::ptrdiff_t>(0, lo(u_r, half_width_r));
         i_r <= std::min<std::ptrdiff_t>(intr.range_bins - 1, hi(u_r, half_width_r));
         ++i_r) {
      const double dr = (static_cast<double>(i_r) - u_r) / noise.spread_range_bins;
      for (std::ptrdiff_t i_a = std::max<std::ptrdiff_t>(0, lo(u_a, half_width_a));
           i_a <=
           std::min<std::ptrdiff_t>(intr.azimuth_bins - 1, hi(u_a, half_width_a));
           ++i_a) {
        const double da =
            (static_cast<double>(i_a) - u_a) / noise.spread_azimuth_bins;
        for (std::ptrdiff_t i_e =
                 std::max<std::ptrdiff_t>(0, lo(u_e, half_width_e));
             i_e <= std::min<std::ptrdiff_t>(intr.elevation_bins - 1,
                                             hi(u_e, half_width_e));
             ++i_e) {
          const double de =
              (static_cast<double>(i_e) - u_e) / noise.spread_elevation_bins;
          const double amplitude =
              e.reflectivity * std::exp(-0.5 * (dr * dr + da * da + de * de));
          const std::size_t idx = cube.flat_index(
              static_cast<std::size_t>(i_r), static_cast<std::size_t>(i_a),
              static_cast<std::size_t>(i_e));
          cube.intensity(static_cast<std::size_t>(i_r),
                         static_cast<std::size_t>(i_a),
                         static_cast<std::size_t>(i_e)) +=
              static_cast<float>(amplitude);
          if (amplitude > dominant[idx]) {
            dominant[idx] = static_cast<float>(amplitude);
            cube.doppler(static_cast<std::size_t>(i_r),
                         static_cast<std::size_t>(i_a),
                         static_cast<std::size_t>(i_e)) =
                static_cast<float>(e.doppler);
          }
        }
      }
    }

    // peak-bin label; TRUE takes precedence over GHOST on collision
    if (const auto bin = polar_to_bin(intr, e.coord)) {
      const std::size_t idx = cube.flat_index(bin->range, bin->azimuth,
                                              bin->elevation);
      if (out.labels[idx] != BinLabel::True) out.labels[idx] = e.label;
    }
  }
  return out;
}

std::vector<LabeledDetection> sample_detections(const Scene& scene,
                                                const RadarIntrinsics& intr,
                                                const PolarSigmas& sigmas,
                                                std::uint64_t seed,
                                                double doppler_sigma) {
  intr.validate();
  sigmas.validate();
  if (!(doppler_sigma >= 0.0))
    throw ConfigError("sample_detections: doppler_sigma must be >= 0");

  Rng rng = Rng(seed).derive(kSampleStream);
  std::vector<LabeledDetection> out;
  out.reserve(scene.scatterers.size() + scene.ghosts.size());

  for (const Emitter& e : scene_emitters(scene)) {
    PolarCoord observed;
    observed.range =
        std::max(1e-6, e.coord.range + rng.normal(0.0, sigmas.sigma_range));
    observed.azimuth = e.coord.azimuth + rng.normal(0.0, sigmas.sigma_azimuth);
    observed.elevation =
        e.coord.elevation + rng.normal(0.0, sigmas.sigma_elevation);

    LabeledDetection labeled;
    labeled.detection.coord = observed;
    labeled.detection.intensity = e.reflectivity;
    labeled.detection.doppler =
        doppler_sigma > 0.0 ? rng.normal(e.doppler, doppler_sigma) : e.doppler;
    labeled.detection.source_bins = polar_to_bin(intr, e.coord);
    labeled.label = e.label == BinLabel::Ghost ? DetectionLabel::Ghost
                                               : DetectionLabel::True;
    out.push_back(labeled);
  }
  return out;
}

}  // namespace rauf
