#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rauf/cfar.hpp"
#include "rauf/doppler.hpp"
#include "rauf/geometry.hpp"
#include "rauf/sim.hpp"
#include "rauf/uncertainty.hpp"

namespace rauf {

/// Shortest-of-9-significant-digits decimal rendering used by every text
/// format in the toolkit ("%.9g").
std::string format_value(double v);

// Detection list: one `range azimuth elevation intensity doppler` line per
// detection, '#' comments and blank lines ignored. Readers throw IoError on
// malformed lines, naming the line number.
void write_detections(const std::filesystem::path& path,
                      std::span<const PolarDetection> detections);
std::vector<PolarDetection> read_detections(const std::filesystem::path& path);

// Plain cloud: `x y z` per line.
void write_cloud(const std::filesystem::path& path,
                 std::span<const CartesianPoint> cloud);
std::vector<CartesianPoint> read_cloud(const std::filesystem::path& path);

// Uncertain cloud: `x y z sxx sxy sxz syy syz szz` per line (upper triangle
// of the covariance; symmetry restored on read).
void write_uncertain_cloud(const std::filesystem::path& path,
                           std::span<const UncertainPoint> cloud);
std::vector<UncertainPoint> read_uncertain_cloud(
    const std::filesystem::path& path);

// Velocity record: a single `vx vy vz` line.
void write_velocity(const std::filesystem::path& path, const EgoVelocity& v);
EgoVelocity read_velocity(const std::filesystem::path& path);

// Scene spec: line-oriented text mirroring the Scene fields —
//   seed N
//   ego_velocity vx vy vz
//   scatterer x y z reflectivity        (one line each)
//   ghost x y z doppler_offset reflectivity
void write_scene(const std::filesystem::path& path, const Scene& scene);
Scene read_scene(const std::filesystem::path& path);

}  // namespace rauf
