#include "rauf/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "rauf/errors.hpp"

namespace rauf {

void SimConfig::validate() const {
  if (!(max_speed >= 0.0))
    throw ConfigError("sim: max_speed must be non-negative");
}

void PipelineConfig::validate() const {
  intrinsics.validate();
  cfar.validate();
  sigmas.validate();
  ransac.validate();
  registration.validate();
  noise.validate();
  sim.validate();
  if (!(min_intensity >= 0.0))
    throw ConfigError("cfar: min_intensity must be non-negative");
  if (!(doppler_threshold > 0.0))
    throw ConfigError("doppler: threshold must be positive");
  if (!(doppler_sigma >= 0.0))
    throw ConfigError("doppler: doppler_sigma must be non-negative");
  if (!(zeta > 0.0) || !(tau > 0.0))
    throw ConfigError("metrics: zeta and tau must be positive");
}

namespace {

// Field registry: each entry binds "section.key" to a member, so the parser
// and the serializer cannot drift apart.
struct Binding {
  std::function<void(PipelineConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

std::string render_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);  // round-trips exactly
  return buf;
}

double parse_double(const std::string& value, const std::string& where) {
  try {
    std::size_t consumed = 0;
    const double v = std::stod(value, &consumed);
    if (consumed != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": cannot parse '" + value + "' as a number");
  }
}

std::uint64_t parse_unsigned(const std::string& value, const std::string& where) {
  std::uint64_t v = 0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ConfigError(where + ": cannot parse '" + value +
                      "' as a non-negative integer");
  return v;
}

Binding bind_double(double PipelineConfig::* member) {
  return {[member](PipelineConfig& c, const std::string& value,
                   const std::string& where) { c.*member = parse_double(value, where); },
          [member](const PipelineConfig& c) { return render_double(c.*member); }};
}

template <typename Sub>
Binding bind_double(Sub PipelineConfig::* section, double Sub::* member) {
  return {[=](PipelineConfig& c, const std::string& value,
              const std::string& where) {
            c.*section.*member = parse_double(value, where);
          },
          [=](const PipelineConfig& c) { return render_double(c.*section.*member); }};
}

template <typename Sub>
Binding bind_size(Sub PipelineConfig::* section, std::size_t Sub::* member) {
  return {[=](PipelineConfig& c, const std::string& value,
              const std::string& where) {
            c.*section.*member =
                static_cast<std::size_t>(parse_unsigned(value, where));
          },
          [=](const PipelineConfig& c) { return std::to_string(c.*section.*member); }};
}

const std::map<std::string, std::map<std::string, Binding>>& bindings() {
  static const auto* table = new std::map<std::string, std::map<std::string, Binding>>{
      {"intrinsics",
       {{"range_bins", bind_size(&PipelineConfig::intrinsics, &RadarIntrinsics::range_bins)},
        {"azimuth_bins", bind_size(&PipelineConfig::intrinsics, &RadarIntrinsics::azimuth_bins)},
        {"elevation_bins", bind_size(&PipelineConfig::intrinsics, &RadarIntrinsics::elevation_bins)},
        {"range_resolution", bind_double(&PipelineConfig::intrinsics, &RadarIntrinsics::range_resolution)},
        {"azimuth_min", bind_double(&PipelineConfig::intrinsics, &RadarIntrinsics::azimuth_min)},
        {"azimuth_max", bind_double(&PipelineConfig::intrinsics, &RadarIntrinsics::azimuth_max)},
        {"elevation_min", bind_double(&PipelineConfig::intrinsics, &RadarIntrinsics::elevation_min)},
        {"elevation_max", bind_double(&PipelineConfig::intrinsics, &RadarIntrinsics::elevation_max)}}},
      {"cfar",
       {{"guard_cells", bind_size(&PipelineConfig::cfar, &CfarConfig::guard_cells)},
        {"train_cells", bind_size(&PipelineConfig::cfar, &CfarConfig::train_cells)},
        {"os_rank_fraction", bind_double(&PipelineConfig::cfar, &CfarConfig::os_rank_fraction)},
        {"scale_factor", bind_double(&PipelineConfig::cfar, &CfarConfig::scale_factor)},
        {"min_intensity", bind_double(&PipelineConfig::min_intensity)}}},
      {"sigmas",
       {{"sigma_range", bind_double(&PipelineConfig::sigmas, &PolarSigmas::sigma_range)},
        {"sigma_azimuth", bind_double(&PipelineConfig::sigmas, &PolarSigmas::sigma_azimuth)},
        {"sigma_elevation", bind_double(&PipelineConfig::sigmas, &PolarSigmas::sigma_elevation)}}},
      {"doppler",
       {{"threshold", bind_double(&PipelineConfig::doppler_threshold)},
        {"doppler_sigma", bind_double(&PipelineConfig::doppler_sigma)}}},
      {"ransac",
       {{"iterations", bind_size(&PipelineConfig::ransac, &RansacConfig::iterations)},
        {"inlier_threshold", bind_double(&PipelineConfig::ransac, &RansacConfig::inlier_threshold)},
        {"min_sample", bind_size(&PipelineConfig::ransac, &RansacConfig::min_sample)}}},
      {"registration",
       {{"max_iterations", bind_size(&PipelineConfig::registration, &RegistrationConfig::max_iterations)},
        {"convergence_tol", bind_double(&PipelineConfig::registration, &RegistrationConfig::convergence_tol)},
        {"max_correspondence_dist", bind_double(&PipelineConfig::registration, &RegistrationConfig::max_correspondence_dist)},
        {"robust_loss_scale", bind_double(&PipelineConfig::registration, &RegistrationConfig::robust_loss_scale)}}},
      {"noise",
       {{"noise_floor", bind_double(&PipelineConfig::noise, &NoiseSpec::noise_floor)},
        {"spread_range_bins", bind_double(&PipelineConfig::noise, &NoiseSpec::spread_range_bins)},
        {"spread_azimuth_bins", bind_double(&PipelineConfig::noise, &NoiseSpec::spread_azimuth_bins)},
        {"spread_elevation_bins", bind_double(&PipelineConfig::noise, &NoiseSpec::spread_elevation_bins)}}},
      {"sim",
       {{"n_scatterers", bind_size(&PipelineConfig::sim, &SimConfig::n_scatterers)},
        {"n_ghosts", bind_size(&PipelineConfig::sim, &SimConfig::n_ghosts)},
        {"max_speed", bind_double(&PipelineConfig::sim, &SimConfig::max_speed)}}},
      {"metrics",
       {{"zeta", bind_double(&PipelineConfig::zeta)},
        {"tau", bind_double(&PipelineConfig::tau)}}},
      {"pipeline",
       {{"seed",
         Binding{[](PipelineConfig& c, const std::string& value,
                    const std::string& where) {
                   c.seed = parse_unsigned(value, where);
                 },
                 [](const PipelineConfig& c) { return std::to_string(c.seed); }}}}}};
  return *table;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

PipelineConfig parse_config_text(const std::string& text) {
  PipelineConfig config;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::set<std::string> seen;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    if (const auto comment = line.find_first_of(";#");
        comment != std::string::npos)
      line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(number);

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(where + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!bindings().count(section))
        throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }

    const auto equals = line.find('=');
    if (equals == std::string::npos)
      throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, equals));
    const std::string value = trim(line.substr(equals + 1));
    if (section.empty())
      throw ConfigError(where + ": key '" + key + "' outside any section");
    const auto& keys = bindings().at(section);
    const auto binding = keys.find(key);
    if (binding == keys.end())
      throw ConfigError(where + ": unknown key '" + key + "' in [" + section + "]");
    if (!seen.insert(section + "." + key).second)
      throw ConfigError(where + ": duplicate key '" + key + "'");
    binding->second.set(config, value, where);
  }
  config.validate();
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config_text(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string serialize_config(const PipelineConfig& config) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, keys] : bindings()) {
    if (!first) out << '\n';
    first = false;
    out << '[' << section << "]\n";
    for (const auto& [key, binding] : keys)
      out << key << " = " << binding.get(config) << '\n';
  }
  return out.str();
}

}  // namespace rauf
