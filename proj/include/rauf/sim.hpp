#pragma once

#include <cstdint>
#include <vector>

#include "rauf/cfar.hpp"
#include "rauf/cube.hpp"
#include "rauf/doppler.hpp"
#include "rauf/geometry.hpp"
#include "rauf/uncertainty.hpp"

namespace rauf {

struct Scatterer {
  CartesianPoint position = CartesianPoint::Zero();
  double reflectivity = 1.0;  // linear power at the footprint peak
};

/// Multipath-style spurious reflector: placed on a real scatterer's ray at
/// the range mirrored across the usable span, with a Doppler offset that
/// breaks the stationary-world kinematic constraint.
struct Ghost {
  CartesianPoint position = CartesianPoint::Zero();
  double doppler_offset = 0.0;  // m/s added to the kinematic prediction
  double reflectivity = 1.0;
};

struct Scene {
  std::vector<Scatterer> scatterers;
  EgoVelocity ego_velocity = EgoVelocity::Zero();
  std::vector<Ghost> ghosts;
  std::uint64_t seed = 0;
};

struct NoiseSpec {
  PolarSigmas sigmas{0.1, 0.01, 0.01};  // per-detection polar spread
  double noise_floor = 1.0;             // mean of the exponential power clutter
  // separable Gaussian footprint stddev, in bins, along (range, az, el)
  double spread_range_bins = 0.6;
  double spread_azimuth_bins = 0.5;
  double spread_elevation_bins = 0.5;

  void validate() const;
};

/// Reflectivity range used by generate_scene; peak SNR over a unit noise
/// floor is then 21.8 to 26 dB.
constexpr double kMinReflectivity = 150.0;
constexpr double kMaxReflectivity = 400.0;

/// Ghost Doppler offsets are drawn with magnitude uniform in this interval
/// and random sign, so every ghost violates a 0.25 m/s consistency gate.
constexpr double kMinGhostDopplerOffset = 0.5;
constexpr double kMaxGhostDopplerOffset = 3.0;

/// Scatterers uniform over the polar box r in [1, max_range), angles across
/// the field of view; ego speed uniform in [0, v_max] with uniform random
/// direction; ghosts derived from randomly chosen parent scatterers.
/// Deterministic per seed.
Scene generate_scene(std::size_t n_scatterers, std::size_t n_ghosts,
                     double v_max, const RadarIntrinsics& intr,
                     std::uint64_t seed);

struct RenderedCube {
  RadarCube cube;
  std::vector<BinLabel> labels;  // per bin, indexed like the cube
};

/// Deposits one separable Gaussian intensity footprint per scatterer and
/// ghost (amplitude = reflectivity, centered on the emitter's fractional bin
/// position), writes the kinematic Doppler of the dominant emitter into each
/// touched bin (plus the ghost offset for ghosts), adds seeded
/// exponential-power clutter at noise_floor, and labels each emitter's peak
/// bin TRUE or GHOST.
RenderedCube render_cube(const Scene& scene, const RadarIntrinsics& intr,
                         const NoiseSpec& noise);

enum class DetectionLabel : std::uint8_t { True = 1, Ghost = 2 };

struct LabeledDetection {
  PolarDetection detection;
  DetectionLabel label = DetectionLabel::True;
};

/// Ideal detector output: each scatterer and ghost yields one detection at
/// its polar coordinate perturbed by N(0, diag(sigmas^2)), with Doppler from
/// the stationary-scatterer model (plus ghost offsets) perturbed by
/// N(0, doppler_sigma^2). Deterministic per seed.
std::vector<LabeledDetection> sample_detections(const Scene& scene,
                                                const RadarIntrinsics& intr,
                                                const PolarSigmas& sigmas,
                                                std::uint64_t seed,
                                                double doppler_sigma = 0.0);

}  // namespace rauf
