#include "rauf/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rauf/errors.hpp"

namespace rauf {

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

void finish_write(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

/// Data lines of a text file with '#' comments stripped, paired with their
/// 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> data_lines(
    const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    lines.emplace_back(number, line);
  }
  return lines;
}

[[noreturn]] void malformed(const std::filesystem::path& path,
                            std::size_t line_number, const std::string& what) {
  throw IoError(path.string() + ":" + std::to_string(line_number) + ": " + what);
}

std::vector<double> parse_fields(const std::filesystem::path& path,
                                 std::size_t line_number,
                                 const std::string& line,
                                 std::size_t expected) {
  std::istringstream stream(line);
  std::vector<double> fields;
  double v;
  while (stream >> v) fields.push_back(v);
  stream.clear();  // the failed numeric extraction left failbit set
  std::string tail;
  if (stream >> tail)
    malformed(path, line_number, "trailing token '" + tail + "'");
  if (fields.size() != expected)
    malformed(path, line_number,
              "expected " + std::to_string(expected) + " fields, got " +
                  std::to_string(fields.size()));
  return fields;
}

void write_fields(std::ofstream& out, std::initializer_list<double> fields) {
  bool first = true;
  for (const double v : fields) {
    if (!first) out << ' ';
    out << format_value(v);
    first = false;
  }
  out << '\n';
}

}  // namespace

void write_detections(const std::filesystem::path& path,
                      std::span<const PolarDetection> detections) {
  std::ofstream out = open_out(path);
  out << "# range azimuth elevation intensity doppler\n";
  for (const PolarDetection& d : detections)
    write_fields(out, {d.coord.range, d.coord.azimuth, d.coord.elevation,
                       d.intensity, d.doppler});
  finish_write(out, path);
}

std::vector<PolarDetection> read_detections(const std::filesystem::path& path) {
  std::vector<PolarDetection> detections;
  for (const auto& [number, line] : data_lines(path)) {
    const auto f = parse_fields(path, number, line, 5);
    PolarDetection d;
    d.coord = {f[0], f[1], f[2]};
    d.intensity = f[3];
    d.doppler = f[4];
    detections.push_back(d);
  }
  return detections;
}

void write_cloud(const std::filesystem::path& path,
                 std::span<const CartesianPoint> cloud) {
  std::ofstream out = open_out(path);
  for (const CartesianPoint& p : cloud)
    write_fields(out, {p.x(), p.y(), p.z()});
  finish_write(out, path);
}

std::vector<CartesianPoint> read_cloud(const std::filesystem::path& path) {
  std::vector<CartesianPoint> cloud;
  for (const auto& [number, line] : data_lines(path)) {
    const auto f = parse_fields(path, number, line, 3);
    cloud.emplace_back(f[0], f[1], f[2]);
  }
  return cloud;
}

void write_uncertain_cloud(const std::filesystem::path& path,
                           std::span<const UncertainPoint> cloud) {
  std::ofstream out = open_out(path);
  out << "# x y z sxx sxy sxz syy syz szz\n";
  for (const UncertainPoint& p : cloud)
    write_fields(out, {p.mean.x(), p.mean.y(), p.mean.z(), p.cov(0, 0),
                       p.cov(0, 1), p.cov(0, 2), p.cov(1, 1), p.cov(1, 2),
                       p.cov(2, 2)});
  finish_write(out, path);
}

std::vector<UncertainPoint> read_uncertain_cloud(
    const std::filesystem::path& path) {
  std::vector<UncertainPoint> cloud;
  for (const auto& [number, line] : data_lines(path)) {
    const auto f = parse_fields(path, number, line, 9);
    UncertainPoint p;
    p.mean = {f[0], f[1], f[2]};
    p.cov << f[3], f[4], f[5],  //
        f[4], f[6], f[7],       //
        f[5], f[7], f[8];
    cloud.push_back(p);
  }
  return cloud;
}

void write_velocity(const std::filesystem::path& path, const EgoVelocity& v) {
  std::ofstream out = open_out(path);
  write_fields(out, {v.x(), v.y(), v.z()});
  finish_write(out, path);
}

EgoVelocity read_velocity(const std::filesystem::path& path) {
  const auto lines = data_lines(path);
  if (lines.size() != 1)
    throw IoError(path.string() + ": expected exactly one velocity line");
  const auto f = parse_fields(path, lines[0].first, lines[0].second, 3);
  return {f[0], f[1], f[2]};
}

void write_scene(const std::filesystem::path& path, const Scene& scene) {
  std::ofstream out = open_out(path);
  out << "seed " << scene.seed << '\n';
  out << "ego_velocity";
  for (const double v : {scene.ego_velocity.x(), scene.ego_velocity.y(),
                         scene.ego_velocity.z()})
    out << ' ' << format_value(v);
  out << '\n';
  for (const Scatterer& s : scene.scatterers) {
    out << "scatterer";
    for (const double v :
         {s.position.x(), s.position.y(), s.position.z(), s.reflectivity})
      out << ' ' << format_value(v);
    out << '\n';
  }
  for (const Ghost& g : scene.ghosts) {
    out << "ghost";
    for (const double v : {g.position.x(), g.position.y(), g.position.z(),
                           g.doppler_offset, g.reflectivity})
      out << ' ' << format_value(v);
    out << '\n';
  }
  finish_write(out, path);
}

Scene read_scene(const std::filesystem::path& path) {
  Scene scene;
  for (const auto& [number, line] : data_lines(path)) {
    std::istringstream stream(line);
    std::string keyword;
    stream >> keyword;
    std::string rest;
    std::getline(stream, rest);
    if (keyword == "seed") {
      std::istringstream value(rest);
      if (!(value >> scene.seed)) malformed(path, number, "bad seed");
    } else if (keyword == "ego_velocity") {
      const auto f = parse_fields(path, number, rest, 3);
      scene.ego_velocity = {f[0], f[1], f[2]};
    } else if (keyword == "scatterer") {
      const auto f = parse_fields(path, number, rest, 4);
      scene.scatterers.push_back({{f[0], f[1], f[2]}, f[3]});
    } else if (keyword == "ghost") {
      const auto f = parse_fields(path, number, rest, 5);
      scene.ghosts.push_back({{f[0], f[1], f[2]}, f[3], f[4]});
    } else {
      malformed(path, number, "unknown keyword '" + keyword + "'");
    }
  }
  return scene;
}

}  // namespace rauf
