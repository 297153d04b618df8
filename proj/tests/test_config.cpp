#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <rauf/config.hpp>
#include <rauf/errors.hpp>
#include <rauf/io.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace rauf;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "rauf_test_config";
  fs::create_directories(dir);
  return dir;
}

fs::path write_text(const std::string& name, const std::string& text) {
  const fs::path path = scratch_dir() / name;
  std::ofstream out(path);
  out << text;
  return path;
}

}  // namespace

TEST_CASE("default configuration is valid") {
  const PipelineConfig config;
  CHECK_NOTHROW(config.validate());
  CHECK(config.intrinsics.range_bins == 96);
  CHECK(config.intrinsics.azimuth_bins == 64);
  CHECK(config.intrinsics.elevation_bins == 24);
  CHECK(config.intrinsics.range_resolution == 0.25);
  CHECK(config.min_intensity == 20.0);
  CHECK(config.doppler_threshold == 0.25);
  CHECK(config.doppler_sigma == 0.0);
  CHECK(config.zeta == 0.5);
  CHECK(config.tau == 0.5);
  CHECK(config.seed == 42);
}

TEST_CASE("serialized configs reparse bit for bit") {
  PipelineConfig config;
  // values without short decimal expansions exercise full precision
  config.sigmas.sigma_range = M_PI;
  config.sigmas.sigma_azimuth = 1.0 / 3.0;
  config.zeta = std::nextafter(0.5, 1.0);
  config.intrinsics.azimuth_min = -0.78539816339744828;
  config.registration.convergence_tol = 1e-300;
  config.seed = std::numeric_limits<std::uint64_t>::max();
  config.sim.n_scatterers = 12345;

  const std::string text = serialize_config(config);
  const PipelineConfig back = parse_config_text(text);

  CHECK(back.sigmas.sigma_range == config.sigmas.sigma_range);
  CHECK(back.sigmas.sigma_azimuth == config.sigmas.sigma_azimuth);
  CHECK(back.zeta == config.zeta);
  CHECK(back.intrinsics.azimuth_min == config.intrinsics.azimuth_min);
  CHECK(back.registration.convergence_tol == config.registration.convergence_tol);
  CHECK(back.seed == config.seed);
  CHECK(back.sim.n_scatterers == config.sim.n_scatterers);

  // a second serialization is byte-identical: stable section and key order
  CHECK(serialize_config(back) == text);
}

TEST_CASE("an empty config text yields the defaults") {
  const PipelineConfig parsed = parse_config_text("");
  CHECK(serialize_config(parsed) == serialize_config(PipelineConfig{}));
}

TEST_CASE("partial configs override only the named keys") {
  const PipelineConfig parsed = parse_config_text(
      "[metrics]\n"
      "zeta = 0.75\n"
      "\n"
      "[doppler]\n"
      "threshold = 0.4\n");
  CHECK(parsed.zeta == 0.75);
  CHECK(parsed.doppler_threshold == 0.4);

  PipelineConfig expected;
  expected.zeta = 0.75;
  expected.doppler_threshold = 0.4;
  CHECK(serialize_config(parsed) == serialize_config(expected));
}

TEST_CASE("comments, blank lines, and spacing are tolerated") {
  const PipelineConfig parsed = parse_config_text(
      "; leading comment\n"
      "\n"
      "[ metrics ]   # header comment\n"
      "  zeta=0.75   ; trailing comment\n"
      "\ttau =\t1.25\n"
      "# [sim] commented out entirely\n");
  CHECK(parsed.zeta == 0.75);
  CHECK(parsed.tau == 1.25);
}

TEST_CASE("config errors name the offending line") {
  CHECK_THROWS_WITH_AS(parse_config_text("[nonsense]\n"),
                       doctest::Contains("unknown section"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("\n\n[nonsense]\n"),
                       doctest::Contains("line 3"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[metrics\n"),
                       doctest::Contains("unterminated"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("zeta = 1\n"),
                       doctest::Contains("outside any section"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[metrics]\nbogus = 1\n"),
                       doctest::Contains("unknown key 'bogus'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[metrics]\nzeta 0.5\n"),
                       doctest::Contains("expected key = value"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_config_text("[metrics]\nzeta = 0.5\nzeta = 0.6\n"),
      doctest::Contains("duplicate key"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[metrics]\nzeta = banana\n"),
                       doctest::Contains("cannot parse 'banana'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[pipeline]\nseed = -5\n"),
                       doctest::Contains("non-negative integer"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[sim]\nn_ghosts = 2.5\n"),
                       doctest::Contains("line 2"), ConfigError);
}

TEST_CASE("parsed values are still validated as a whole") {
  CHECK_THROWS_AS(parse_config_text("[metrics]\nzeta = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[metrics]\nzeta = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[doppler]\nthreshold = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[intrinsics]\nrange_bins = 0\n"),
                  ConfigError);
  CHECK_THROWS_AS(
      parse_config_text("[cfar]\nos_rank_fraction = 1.5\n"), ConfigError);
}

TEST_CASE("config files load from disk with path context") {
  const fs::path path = write_text("good.ini",
                                   "[pipeline]\n"
                                   "seed = 7\n");
  CHECK(load_config(path).seed == 7);

  CHECK_THROWS_AS(load_config(scratch_dir() / "missing.ini"), IoError);

  const fs::path bad = write_text("bad.ini", "[metrics]\nzeta = x\n");
  CHECK_THROWS_WITH_AS(load_config(bad), doctest::Contains("bad.ini"),
                       ConfigError);
}

TEST_CASE("value rendering keeps nine significant digits") {
  CHECK(format_value(2.5) == "2.5");
  CHECK(format_value(-0.125) == "-0.125");
  CHECK(format_value(0.0) == "0");
  CHECK(format_value(1e10) == "1e+10");
  CHECK(format_value(123456789.0) == "123456789");
  CHECK(format_value(1.25e-7) == "1.25e-07");
}

TEST_CASE("detection lists round trip through text") {
  const fs::path path = scratch_dir() / "detections.txt";
  const std::vector<PolarDetection> detections = {
      {{12.25, 0.5, -0.125}, 150.0, -3.5, std::nullopt},
      {{0.75, -0.25, 0.0625}, 37.5, 2.0, std::nullopt},
      {{5.0, 0.0, 0.0}, 20.0, 0.0, std::nullopt},
  };
  write_detections(path, detections);

  const std::vector<PolarDetection> back = read_detections(path);
  REQUIRE(back.size() == detections.size());
  for (std::size_t i = 0; i < detections.size(); ++i) {
    CHECK(back[i].coord.range == detections[i].coord.range);
    CHECK(back[i].coord.azimuth == detections[i].coord.azimuth);
    CHECK(back[i].coord.elevation == detections[i].coord.elevation);
    CHECK(back[i].intensity == detections[i].intensity);
    CHECK(back[i].doppler == detections[i].doppler);
  }
}

TEST_CASE("detection text tolerates comments and reports bad lines") {
  const fs::path ok = write_text("ok_detections.txt",
                                 "# heading\n"
                                 "\n"
                                 "1.5 0.25 -0.125 100 0.5  # trailing note\n"
                                 "   \t\n"
                                 "2.5 0 0 50 -1\n");
  const auto detections = read_detections(ok);
  REQUIRE(detections.size() == 2);
  CHECK(detections[0].coord.range == 1.5);
  CHECK(detections[1].intensity == 50.0);

  const fs::path short_line =
      write_text("short_detections.txt", "1.5 0.25 -0.125 100\n");
  CHECK_THROWS_WITH_AS(read_detections(short_line),
                       doctest::Contains("expected 5 fields, got 4"), IoError);

  const fs::path trailing =
      write_text("trailing_detections.txt", "\n1 2 3 4 5 pelican\n");
  CHECK_THROWS_WITH_AS(read_detections(trailing),
                       doctest::Contains(":2: trailing token 'pelican'"),
                       IoError);

  CHECK_THROWS_AS(read_detections(scratch_dir() / "no_such_file.txt"), IoError);
}

TEST_CASE("plain clouds round trip through text") {
  const fs::path path = scratch_dir() / "cloud.txt";
  const std::vector<CartesianPoint> cloud = {
      {1.5, -2.25, 0.125}, {0.0, 0.0, 0.0}, {-7.5, 3.0, -0.0625}};
  write_cloud(path, cloud);
  const auto back = read_cloud(path);
  REQUIRE(back.size() == cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) CHECK(back[i] == cloud[i]);

  CHECK_THROWS_WITH_AS(read_cloud(write_text("bad_cloud.txt", "1 2\n")),
                       doctest::Contains("expected 3 fields"), IoError);
}

TEST_CASE("uncertain clouds restore covariance symmetry") {
  const fs::path path = scratch_dir() / "uncertain.txt";
  UncertainPoint p;
  p.mean = {4.5, -1.25, 0.5};
  p.cov << 2.0, 0.25, -0.125,  //
      0.25, 1.5, 0.0625,       //
      -0.125, 0.0625, 0.75;
  write_uncertain_cloud(path, std::vector<UncertainPoint>{p});

  const auto back = read_uncertain_cloud(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0].mean == p.mean);
  CHECK(back[0].cov == p.cov);
  CHECK(back[0].cov == back[0].cov.transpose().eval());

  CHECK_THROWS_WITH_AS(
      read_uncertain_cloud(write_text("bad_uncertain.txt", "1 2 3 4 5 6 7 8\n")),
      doctest::Contains("expected 9 fields, got 8"), IoError);
}

TEST_CASE("velocity records hold exactly one line") {
  const fs::path path = scratch_dir() / "velocity.txt";
  write_velocity(path, EgoVelocity(1.5, -0.25, 0.0));
  CHECK(read_velocity(path) == EgoVelocity(1.5, -0.25, 0.0));

  CHECK_THROWS_WITH_AS(
      read_velocity(write_text("two_velocities.txt", "1 2 3\n4 5 6\n")),
      doctest::Contains("exactly one velocity line"), IoError);
  CHECK_THROWS_AS(read_velocity(write_text("empty_velocity.txt", "# nothing\n")),
                  IoError);
}

TEST_CASE("scene specs round trip through text") {
  Scene scene;
  scene.seed = 90210;
  scene.ego_velocity = {1.5, -0.5, 0.25};
  scene.scatterers = {{{10.0, 2.5, -1.25}, 150.0}, {{4.0, -3.5, 0.5}, 300.0}};
  scene.ghosts = {{{12.5, 0.0, 0.75}, 1.5, 80.0}};

  const fs::path path = scratch_dir() / "scene.txt";
  write_scene(path, scene);
  const Scene back = read_scene(path);

  CHECK(back.seed == scene.seed);
  CHECK(back.ego_velocity == scene.ego_velocity);
  REQUIRE(back.scatterers.size() == 2);
  REQUIRE(back.ghosts.size() == 1);
  CHECK(back.scatterers[0].position == scene.scatterers[0].position);
  CHECK(back.scatterers[0].reflectivity == 150.0);
  CHECK(back.scatterers[1].position == scene.scatterers[1].position);
  CHECK(back.ghosts[0].position == scene.ghosts[0].position);
  CHECK(back.ghosts[0].doppler_offset == 1.5);
  CHECK(back.ghosts[0].reflectivity == 80.0);
}

TEST_CASE("scene parsing reports unknown keywords and bad fields") {
  CHECK_THROWS_WITH_AS(
      read_scene(write_text("bad_scene_keyword.txt", "meteor 1 2 3\n")),
      doctest::Contains("unknown keyword 'meteor'"), IoError);
  CHECK_THROWS_WITH_AS(
      read_scene(write_text("bad_scene_fields.txt", "scatterer 1 2 3\n")),
      doctest::Contains("expected 4 fields"), IoError);
  CHECK_THROWS_WITH_AS(read_scene(write_text("bad_scene_seed.txt", "seed\n")),
                       doctest::Contains("bad seed"), IoError);

  // comments apply to scene files too
  const Scene scene = read_scene(write_text(
      "commented_scene.txt", "# a scene\nseed 5\nego_velocity 1 0 0\n"));
  CHECK(scene.seed == 5);
  CHECK(scene.ego_velocity == EgoVelocity(1.0, 0.0, 0.0));
  CHECK(scene.scatterers.empty());
}
