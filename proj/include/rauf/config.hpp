#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "rauf/cfar.hpp"
#include "rauf/doppler.hpp"
#include "rauf/geometry.hpp"
#include "rauf/metrics.hpp"
#include "rauf/registration.hpp"
#include "rauf/sim.hpp"
#include "rauf/uncertainty.hpp"

namespace rauf {

/// Scene size knobs for the simulator.
struct SimConfig {
  std::size_t n_scatterers = 25;
  std::size_t n_ghosts = 10;
  double max_speed = 5.0;  // m/s

  void validate() const;
};

/// Every tunable of the toolkit, grouped like the config file sections.
/// All angles are radians, all distances meters.
struct PipelineConfig {
  RadarIntrinsics intrinsics{96, 64, 24,
                             0.25,
                             -0.78539816339744828, 0.78539816339744828,
                             -0.17453292519943295, 0.17453292519943295};
  CfarConfig cfar;
  double min_intensity = 20.0;  // detection power floor after CFAR
  PolarSigmas sigmas{0.1, 0.012, 0.012};
  double doppler_threshold = 0.25;  // m/s consistency gate
  double doppler_sigma = 0.0;       // simulated Doppler measurement noise, m/s
  RansacConfig ransac;
  RegistrationConfig registration;
  NoiseSpec noise;
  SimConfig sim;
  double zeta = kDefaultZeta;  // clutter distance threshold
  double tau = kDefaultZeta;   // f-score match radius
  std::uint64_t seed = 42;

  void validate() const;
};

/// Strict INI-style parser: `[section]` headers, `key = value` pairs,
/// ';' and '#' comments. Unknown sections or keys, duplicate keys, and
/// unparsable values all raise ConfigError naming the line.
PipelineConfig parse_config_text(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

/// Serialization with full round-trip precision:
/// parse_config_text(serialize_config(c)) reproduces c bit for bit.
std::string serialize_config(const PipelineConfig& config);

}  // namespace rauf
