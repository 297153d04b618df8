// Command-line front end: one subcommand per pipeline stage plus the
// end-to-end `pipeline` run. Exit codes: 0 success, 2 usage error,
// 3 bad configuration, 4 I/O failure, 5 numeric/domain failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rauf/config.hpp"
#include "rauf/errors.hpp"
#include "rauf/pipeline.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitIo = 4;
constexpr int kExitDomain = 5;

struct CommonOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App& cmd, CommonOptions& opts) {
  cmd.add_option("--config", opts.config_path, "configuration file");
  cmd.add_option("--out", opts.out_dir, "output directory");
  cmd.add_option("--seed", opts.seed, "override the configured seed");
}

rauf::PipelineConfig resolve_config(const CommonOptions& opts) {
  rauf::PipelineConfig cfg;
  if (!opts.config_path.empty()) cfg = rauf::load_config(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  return cfg;
}

void print_report(const rauf::Report& report) {
  std::cout << report.to_string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"radar spatial-perception toolkit"};
  app.require_subcommand(1);

  CommonOptions simulate_opts;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "render a seeded synthetic scene to a radar cube");
  add_common(*simulate, simulate_opts);

  CommonOptions detect_opts;
  std::string detect_cube_path;
  CLI::App* detect =
      app.add_subcommand("detect", "run OS-CFAR detection over a cube file");
  detect->add_option("cube", detect_cube_path, "input .rcub file")->required();
  add_common(*detect, detect_opts);

  CommonOptions filter_opts;
  std::string filter_detections;
  std::vector<double> filter_velocity;
  std::optional<double> filter_threshold;
  CLI::App* filter = app.add_subcommand(
      "filter", "drop detections violating the ego-motion Doppler gate");
  filter->add_option("detections", filter_detections, "detection file")
      ->required();
  filter->add_option("--velocity", filter_velocity,
                     "ego velocity vx vy vz (estimated by RANSAC when absent)")
      ->expected(3);
  filter->add_option("--doppler-threshold", filter_threshold,
                     "consistency gate, m/s");
  add_common(*filter, filter_opts);

  CommonOptions propagate_opts;
  std::string propagate_detections;
  CLI::App* propagate = app.add_subcommand(
      "propagate", "attach Cartesian covariances to polar detections");
  propagate->add_option("detections", propagate_detections, "detection file")
      ->required();
  add_common(*propagate, propagate_opts);

  CommonOptions evaluate_opts;
  std::string evaluate_cloud, evaluate_reference;
  std::optional<double> evaluate_tau, evaluate_zeta;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "score a cloud against a reference cloud");
  evaluate->add_option("cloud", evaluate_cloud, "cloud under test")->required();
  evaluate->add_option("reference", evaluate_reference, "reference cloud")
      ->required();
  evaluate->add_option("--tau", evaluate_tau, "f-score match radius, m");
  evaluate->add_option("--zeta", evaluate_zeta, "clutter distance threshold, m");
  add_common(*evaluate, evaluate_opts);

  CommonOptions register_opts;
  std::string register_source, register_target;
  CLI::App* register_cmd = app.add_subcommand(
      "register", "uncertainty-weighted rigid registration of two clouds");
  register_cmd->add_option("source", register_source, "source uncertain cloud")
      ->required();
  register_cmd->add_option("target", register_target, "target uncertain cloud")
      ->required();
  add_common(*register_cmd, register_opts);

  CommonOptions eve_opts;
  std::string eve_detections;
  CLI::App* eve = app.add_subcommand(
      "eve", "estimate ego velocity from detection Doppler by RANSAC");
  eve->add_option("detections", eve_detections, "detection file")->required();
  add_common(*eve, eve_opts);

  CommonOptions bdaf_opts;
  std::size_t bdaf_instances = 20;
  CLI::App* bdaf = app.add_subcommand(
      "bdaf-check", "finite-difference check of the fusion gradients");
  bdaf->add_option("--instances", bdaf_instances, "random instances to run");
  add_common(*bdaf, bdaf_opts);

  CommonOptions pipeline_opts;
  std::optional<double> pipeline_tau, pipeline_zeta, pipeline_threshold;
  CLI::App* pipeline = app.add_subcommand(
      "pipeline", "simulate, detect, filter, propagate, and evaluate");
  pipeline->add_option("--tau", pipeline_tau, "f-score match radius, m");
  pipeline->add_option("--zeta", pipeline_zeta, "clutter distance threshold, m");
  pipeline->add_option("--doppler-threshold", pipeline_threshold,
                       "consistency gate, m/s");
  add_common(*pipeline, pipeline_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    rauf::Report report;
    if (simulate->parsed()) {
      report = rauf::run_simulate(resolve_config(simulate_opts),
                                  simulate_opts.out_dir);
    } else if (detect->parsed()) {
      report = rauf::run_detect(resolve_config(detect_opts), detect_cube_path,
                                detect_opts.out_dir);
    } else if (filter->parsed()) {
      rauf::PipelineConfig cfg = resolve_config(filter_opts);
      if (filter_threshold) cfg.doppler_threshold = *filter_threshold;
      std::optional<rauf::EgoVelocity> velocity;
      if (!filter_velocity.empty())
        velocity = rauf::EgoVelocity(filter_velocity[0], filter_velocity[1],
                                     filter_velocity[2]);
      report = rauf::run_filter(cfg, filter_detections, velocity,
                                filter_opts.out_dir);
    } else if (propagate->parsed()) {
      report = rauf::run_propagate(resolve_config(propagate_opts),
                                   propagate_detections,
                                   propagate_opts.out_dir);
    } else if (evaluate->parsed()) {
      rauf::PipelineConfig cfg = resolve_config(evaluate_opts);
      if (evaluate_tau) cfg.tau = *evaluate_tau;
      if (evaluate_zeta) cfg.zeta = *evaluate_zeta;
      report = rauf::run_evaluate(cfg, evaluate_cloud, evaluate_reference,
                                  evaluate_opts.out_dir);
    } else if (register_cmd->parsed()) {
      report = rauf::run_register(resolve_config(register_opts),
                                  register_source, register_target,
                                  register_opts.out_dir);
    } else if (eve->parsed()) {
      report = rauf::run_eve(resolve_config(eve_opts), eve_detections,
                             eve_opts.out_dir);
    } else if (bdaf->parsed()) {
      const rauf::PipelineConfig cfg = resolve_config(bdaf_opts);
      report = rauf::run_bdaf_check(cfg.seed, bdaf_instances, bdaf_opts.out_dir);
    } else if (pipeline->parsed()) {
      rauf::PipelineConfig cfg = resolve_config(pipeline_opts);
      if (pipeline_tau) cfg.tau = *pipeline_tau;
      if (pipeline_zeta) cfg.zeta = *pipeline_zeta;
      if (pipeline_threshold) cfg.doppler_threshold = *pipeline_threshold;
      report = rauf::run_pipeline(cfg, pipeline_opts.out_dir);
    }
    print_report(report);
    return 0;
  } catch (const rauf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const rauf::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const rauf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  }
}
