#include "rauf/pipeline.hpp"

#include <fstream>

#include <Eigen/Geometry>

#include "rauf/bdaf.hpp"
#include "rauf/errors.hpp"
#include "rauf/io.hpp"
#include "rauf/registration.hpp"
#include "rauf/rng.hpp"
#include "rauf/uncertainty.hpp"

namespace rauf {

void Report::add(const std::string& key, const std::string& value) {
  entries_.emplace_back(key, value);
}

void Report::add(const std::string& key, double value) {
  entries_.emplace_back(key, format_value(value));
}

void Report::add(const std::string& key, std::uint64_t value) {
  entries_.emplace_back(key, std::to_string(value));
}

std::string Report::to_string() const {
  std::string out;
  for (const auto& [key, value] : entries_) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  }
  return out;
}

void Report::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << to_string();
  if (!out.flush()) throw IoError("failed writing " + path.string());
}

namespace {

std::filesystem::path ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec && !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory " + dir.string());
  return dir;
}

std::vector<CartesianPoint> detection_positions(
    std::span<const PolarDetection> detections) {
  std::vector<CartesianPoint> cloud;
  cloud.reserve(detections.size());
  for (const PolarDetection& d : detections)
    cloud.push_back(polar_to_cartesian(d.coord));
  return cloud;
}

std::vector<UncertainPoint> propagate_detections(
    std::span<const PolarDetection> detections, const PolarSigmas& sigmas) {
  std::vector<UncertainPoint> cloud;
  cloud.reserve(detections.size());
  for (const PolarDetection& d : detections)
    cloud.push_back({polar_to_cartesian(d.coord),
                     propagate_covariance(d.coord, sigmas)});
  return cloud;
}

std::vector<PolarDetection> apply_verdicts(
    std::span<const PolarDetection> detections,
    const std::vector<ConsistencyVerdict>& verdicts) {
  std::vector<PolarDetection> kept;
  for (const ConsistencyVerdict& v : verdicts)
    if (v.inlier) kept.push_back(detections[v.detection_index]);
  return kept;
}

RansacConfig seeded_ransac(const PipelineConfig& cfg) {
  RansacConfig ransac = cfg.ransac;
  ransac.seed = cfg.seed;
  return ransac;
}

std::string metric_record(const MetricReport& m) {
  return format_value(m.chamfer) + " " + format_value(m.f) + " " +
         format_value(m.precision) + " " + format_value(m.recall) + " " +
         format_value(m.cpr);
}

}  // namespace

Report run_simulate(const PipelineConfig& cfg,
                    const std::filesystem::path& out_dir) {
  cfg.validate();
  const auto dir = ensure_dir(out_dir);
  const Scene scene = generate_scene(cfg.sim.n_scatterers, cfg.sim.n_ghosts,
                                     cfg.sim.max_speed, cfg.intrinsics, cfg.seed);
  const RenderedCube rendered = render_cube(scene, cfg.intrinsics, cfg.noise);

  write_cube(dir / "cube.rcub", rendered.cube);
  write_labels(dir / "labels.rlbl", cfg.intrinsics, rendered.labels);
  write_scene(dir / "scene.txt", scene);
  std::vector<CartesianPoint> truth;
  truth.reserve(scene.scatterers.size());
  for (const Scatterer& s : scene.scatterers) truth.push_back(s.position);
  write_cloud(dir / "truth.xyz", truth);
  write_velocity(dir / "ego_velocity.txt", scene.ego_velocity);

  Report report;
  report.add("seed", cfg.seed);
  report.add("scatterers", static_cast<std::uint64_t>(scene.scatterers.size()));
  report.add("ghosts", static_cast<std::uint64_t>(scene.ghosts.size()));
  report.add("ego_speed", scene.ego_velocity.norm());
  report.add("cube", (dir / "cube.rcub").string());
  return report;
}

Report run_detect(const PipelineConfig& cfg,
                  const std::filesystem::path& cube_path,
                  const std::filesystem::path& out_dir) {
  cfg.cfar.validate();
  const auto dir = ensure_dir(out_dir);
  const RadarCube cube = read_cube(cube_path);
  const std::vector<PolarDetection> detections =
      detect_cube(cube, cfg.cfar, cfg.min_intensity);
  write_detections(dir / "detections.txt", detections);

  Report report;
  report.add("cube", cube_path.string());
  report.add("detections", static_cast<std::uint64_t>(detections.size()));
  return report;
}

Report run_filter(const PipelineConfig& cfg,
                  const std::filesystem::path& detections_path,
                  const std::optional<EgoVelocity>& velocity,
                  const std::filesystem::path& out_dir) {
  const auto dir = ensure_dir(out_dir);
  const std::vector<PolarDetection> detections =
      read_detections(detections_path);

  EgoVelocity v;
  if (velocity) {
    v = *velocity;
    validate_ego_velocity(v);
  } else {
    v = estimate_ego_velocity_ransac(detections, seeded_ransac(cfg)).velocity;
  }

  const auto verdicts = consistency_filter(detections, v, cfg.doppler_threshold);
  const auto kept = apply_verdicts(detections, verdicts);
  write_detections(dir / "filtered.txt", kept);

  Report report;
  report.add("velocity_source", velocity ? "given" : "estimated");
  report.add("vx", v.x());
  report.add("vy", v.y());
  report.add("vz", v.z());
  report.add("threshold", cfg.doppler_threshold);
  report.add("detections", static_cast<std::uint64_t>(detections.size()));
  report.add("kept", static_cast<std::uint64_t>(kept.size()));
  report.write(dir / "filter_report.txt");
  return report;
}

Report run_propagate(const PipelineConfig& cfg,
                     const std::filesystem::path& detections_path,
                     const std::filesystem::path& out_dir) {
  cfg.sigmas.validate();
  const auto dir = ensure_dir(out_dir);
  const std::vector<PolarDetection> detections =
      read_detections(detections_path);
  const auto cloud = propagate_detections(detections, cfg.sigmas);
  write_uncertain_cloud(dir / "uncertain.txt", cloud);

  Report report;
  report.add("points", static_cast<std::uint64_t>(cloud.size()));
  report.add("sigma_range", cfg.sigmas.sigma_range);
  report.add("sigma_azimuth", cfg.sigmas.sigma_azimuth);
  report.add("sigma_elevation", cfg.sigmas.sigma_elevation);
  return report;
}

Report run_evaluate(const PipelineConfig& cfg,
                    const std::filesystem::path& cloud_path,
                    const std::filesystem::path& reference_path,
                    const std::filesystem::path& out_dir) {
  const auto dir = ensure_dir(out_dir);
  const auto cloud = read_cloud(cloud_path);
  const auto reference = read_cloud(reference_path);
  const MetricReport m = evaluate(cloud, reference, cfg.tau, cfg.zeta);

  Report report;
  report.add("record", metric_record(m));
  report.add("cd", m.chamfer);
  report.add("f", m.f);
  report.add("precision", m.precision);
  report.add("recall", m.recall);
  report.add("cpr", m.cpr);
  report.add("tau", m.tau);
  report.add("zeta", m.zeta);
  report.write(dir / "metrics_report.txt");
  return report;
}

Report run_register(const PipelineConfig& cfg,
                    const std::filesystem::path& source_path,
                    const std::filesystem::path& target_path,
                    const std::filesystem::path& out_dir) {
  const auto dir = ensure_dir(out_dir);
  const auto source = read_uncertain_cloud(source_path);
  const auto target = read_uncertain_cloud(target_path);
  const RegistrationResult result =
      register_uncertain(source, target, cfg.registration);

  const Eigen::Quaterniond q(result.transform.rotation);
  const auto& t = result.transform.translation;
  Report report;
  report.add("record", format_value(t.x()) + " " + format_value(t.y()) + " " +
                           format_value(t.z()) + " " + format_value(q.w()) +
                           " " + format_value(q.x()) + " " +
                           format_value(q.y()) + " " + format_value(q.z()) +
                           " " + format_value(result.final_cost) + " " +
                           std::to_string(result.iterations));
  report.add("tx", t.x());
  report.add("ty", t.y());
  report.add("tz", t.z());
  report.add("qw", q.w());
  report.add("qx", q.x());
  report.add("qy", q.y());
  report.add("qz", q.z());
  report.add("cost", result.final_cost);
  report.add("iterations", static_cast<std::uint64_t>(result.iterations));
  report.add("correspondences",
             static_cast<std::uint64_t>(result.correspondences));
  report.write(dir / "register_report.txt");
  return report;
}

Report run_eve(const PipelineConfig& cfg,
               const std::filesystem::path& detections_path,
               const std::filesystem::path& out_dir) {
  const auto dir = ensure_dir(out_dir);
  const std::vector<PolarDetection> detections =
      read_detections(detections_path);
  const RansacResult result =
      estimate_ego_velocity_ransac(detections, seeded_ransac(cfg));
  write_velocity(dir / "velocity.txt", result.velocity);

  Report report;
  report.add("vx", result.velocity.x());
  report.add("vy", result.velocity.y());
  report.add("vz", result.velocity.z());
  report.add("inliers", static_cast<std::uint64_t>(result.inlier_count));
  report.add("detections", static_cast<std::uint64_t>(detections.size()));
  report.write(dir / "eve_report.txt");
  return report;
}

Report run_bdaf_check(std::uint64_t seed, std::size_t instances,
                      const std::filesystem::path& out_dir) {
  const auto dir = ensure_dir(out_dir);
  double worst = 0.0;
  std::size_t checks = 0;
  Rng shapes(seed);
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t tokens = 1 + shapes.uniform_index(8);
    const std::size_t channels = 2 + shapes.uniform_index(15);
    const std::size_t d_k = 1 + shapes.uniform_index(8);
    const GradientCheckReport r =
        bdaf_gradient_check(tokens, channels, d_k, seed + i);
    worst = std::max(worst, r.max_relative_error);
    checks += r.checks;
  }

  Report report;
  report.add("instances", static_cast<std::uint64_t>(instances));
  report.add("parameters_checked", static_cast<std::uint64_t>(checks));
  report.add("max_relative_error", worst);
  report.write(dir / "bdaf_report.txt");
  return report;
}

Report run_pipeline(const PipelineConfig& cfg,
                    const std::filesystem::path& out_dir) {
  cfg.validate();
  const auto dir = ensure_dir(out_dir);

  // simulate
  const Scene scene = generate_scene(cfg.sim.n_scatterers, cfg.sim.n_ghosts,
                                     cfg.sim.max_speed, cfg.intrinsics, cfg.seed);
  const RenderedCube rendered = render_cube(scene, cfg.intrinsics, cfg.noise);
  write_cube(dir / "cube.rcub", rendered.cube);
  write_labels(dir / "labels.rlbl", cfg.intrinsics, rendered.labels);
  write_scene(dir / "scene.txt", scene);
  std::vector<CartesianPoint> truth;
  truth.reserve(scene.scatterers.size());
  for (const Scatterer& s : scene.scatterers) truth.push_back(s.position);
  write_cloud(dir / "truth.xyz", truth);
  write_velocity(dir / "ego_velocity.txt", scene.ego_velocity);
  if (truth.empty()) throw DegenerateError("pipeline: scene has no scatterers");

  // detect
  const std::vector<PolarDetection> detections =
      detect_cube(rendered.cube, cfg.cfar, cfg.min_intensity);
  write_detections(dir / "detections.txt", detections);
  if (detections.empty())
    throw DegenerateError("pipeline: detector produced no detections");

  // filter
  const RansacResult eve =
      estimate_ego_velocity_ransac(detections, seeded_ransac(cfg));
  const auto verdicts =
      consistency_filter(detections, eve.velocity, cfg.doppler_threshold);
  const auto kept = apply_verdicts(detections, verdicts);
  write_detections(dir / "filtered.txt", kept);
  if (kept.empty())
    throw DegenerateError("pipeline: Doppler gate removed every detection");

  // propagate
  const auto uncertain = propagate_detections(kept, cfg.sigmas);
  write_uncertain_cloud(dir / "uncertain.txt", uncertain);

  // evaluate against the true scatterers, before and after the gate
  const MetricReport before =
      evaluate(detection_positions(detections), truth, cfg.tau, cfg.zeta);
  const MetricReport after =
      evaluate(detection_positions(kept), truth, cfg.tau, cfg.zeta);

  Report report;
  report.add("seed", cfg.seed);
  report.add("scatterers", static_cast<std::uint64_t>(scene.scatterers.size()));
  report.add("ghosts", static_cast<std::uint64_t>(scene.ghosts.size()));
  report.add("detections_total", static_cast<std::uint64_t>(detections.size()));
  report.add("detections_kept", static_cast<std::uint64_t>(kept.size()));
  report.add("ego_speed", scene.ego_velocity.norm());
  report.add("velocity_error", (eve.velocity - scene.ego_velocity).norm());
  report.add("chamfer_unfiltered", before.chamfer);
  report.add("chamfer_filtered", after.chamfer);
  report.add("fscore_unfiltered", before.f);
  report.add("fscore_filtered", after.f);
  report.add("cpr_unfiltered", before.cpr);
  report.add("cpr_filtered", after.cpr);
  report.add("tau", cfg.tau);
  report.add("zeta", cfg.zeta);
  report.write(dir / "report.txt");
  return report;
}

}  // namespace rauf
