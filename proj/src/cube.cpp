#include "rauf/cube.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "rauf/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "cube file I/O assumes a little-endian host");

namespace rauf {

namespace {

constexpr std::uint32_t kCubeVersion = 1;

void write_bytes(std::ostream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

template <typename T>
void write_pod(std::ostream& out, T value) {
  write_bytes(out, &value, sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

}  // namespace

namespace detail {

void write_grid_header(std::ostream& out, const char magic[4],
                       const RadarIntrinsics& intr) {
  write_bytes(out, magic, 4);
  write_pod<std::uint32_t>(out, kCubeVersion);
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(intr.range_bins));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(intr.azimuth_bins));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(intr.elevation_bins));
  write_pod<double>(out, intr.range_resolution);
  write_pod<double>(out, intr.azimuth_min);
  write_pod<double>(out, intr.azimuth_max);
  write_pod<double>(out, intr.elevation_min);
  write_pod<double>(out, intr.elevation_max);
}

RadarIntrinsics read_grid_header(std::istream& in, const char expected_magic[4],
                                 const std::filesystem::path& path) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, expected_magic, 4) != 0)
    throw IoError(path.string() + ": bad magic, expected " +
                  std::string(expected_magic, 4));
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kCubeVersion)
    throw IoError(path.string() + ": unsupported version " +
                  std::to_string(version));
  RadarIntrinsics intr;
  intr.range_bins = read_pod<std::uint32_t>(in);
  intr.azimuth_bins = read_pod<std::uint32_t>(in);
  intr.elevation_bins = read_pod<std::uint32_t>(in);
  intr.range_resolution = read_pod<double>(in);
  intr.azimuth_min = read_pod<double>(in);
  intr.azimuth_max = read_pod<double>(in);
  intr.elevation_min = read_pod<double>(in);
  intr.elevation_max = read_pod<double>(in);
  if (!in) throw IoError(path.string() + ": truncated header");
  intr.validate();
  return intr;
}

}  // namespace detail

using detail::read_grid_header;
using detail::write_grid_header;

RadarCube::RadarCube(const RadarIntrinsics& intr, std::vector<float> intensity,
                     std::vector<float> doppler)
    : intr_(intr), intensity_(std::move(intensity)), doppler_(std::move(doppler)) {
  validate();
}

RadarCube::RadarCube(const RadarIntrinsics& intr)
    : intr_(intr),
      intensity_(intr.cell_count(), 0.0f),
      doppler_(intr.cell_count(), 0.0f) {
  intr_.validate();
}

void RadarCube::validate() const {
  intr_.validate();
  const std::size_t n = intr_.cell_count();
  if (intensity_.size() != n || doppler_.size() != n)
    throw ConfigError("cube: channel extents do not match intrinsics");
  for (const float v : intensity_)
    if (!(v >= 0.0f))
      throw ConfigError("cube: intensity must be non-negative and finite");
}

void write_cube(const std::filesystem::path& path, const RadarCube& cube) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_grid_header(out, "RCUB", cube.intrinsics());
  const auto& inten = cube.intensity_data();
  const auto& dopp = cube.doppler_data();
  write_bytes(out, inten.data(), inten.size() * sizeof(float));
  write_bytes(out, dopp.data(), dopp.size() * sizeof(float));
  if (!out) throw IoError("failed writing " + path.string());
}

RadarCube read_cube(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const RadarIntrinsics intr = read_grid_header(in, "RCUB", path);
  const std::size_t n = intr.cell_count();
  std::vector<float> intensity(n), doppler(n);
  in.read(reinterpret_cast<char*>(intensity.data()),
          static_cast<std::streamsize>(n * sizeof(float)));
  in.read(reinterpret_cast<char*>(doppler.data()),
          static_cast<std::streamsize>(n * sizeof(float)));
  if (!in) throw IoError(path.string() + ": truncated payload");
  return RadarCube(intr, std::move(intensity), std::move(doppler));
}

void write_labels(const std::filesystem::path& path, const RadarIntrinsics& intr,
                  const std::vector<BinLabel>& labels) {
  if (labels.size() != intr.cell_count())
    throw ConfigError("labels: extent does not match intrinsics");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_grid_header(out, "RLBL", intr);
  write_bytes(out, labels.data(), labels.size());
  if (!out) throw IoError("failed writing " + path.string());
}

std::pair<RadarIntrinsics, std::vector<BinLabel>> read_labels(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const RadarIntrinsics intr = read_grid_header(in, "RLBL", path);
  std::vector<BinLabel> labels(intr.cell_count());
  in.read(reinterpret_cast<char*>(labels.data()),
          static_cast<std::streamsize>(labels.size()));
  if (!in) throw IoError(path.string() + ": truncated payload");
  return {intr, std::move(labels)};
}

}  // namespace rauf
