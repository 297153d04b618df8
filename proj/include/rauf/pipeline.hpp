#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rauf/config.hpp"
#include "rauf/doppler.hpp"
#include "rauf/metrics.hpp"
#include "rauf/sim.hpp"

namespace rauf {

/// Ordered key=value lines; rendered in insertion order so a fixed seed
/// yields byte-identical report files.
class Report {
 public:
  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);          // 9 significant digits
  void add(const std::string& key, std::uint64_t value);

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }
  std::string to_string() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// simulate: seeded scene -> cube.rcub, labels.rlbl, scene.txt, truth.xyz,
/// ego_velocity.txt under out_dir (created when missing).
Report run_simulate(const PipelineConfig& cfg,
                    const std::filesystem::path& out_dir);

/// detect: CFAR over a cube file -> detections.txt.
Report run_detect(const PipelineConfig& cfg,
                  const std::filesystem::path& cube_path,
                  const std::filesystem::path& out_dir);

/// filter: Doppler-consistency gate over a detection file -> filtered.txt.
/// Uses the given ego velocity, or estimates one by RANSAC when absent.
Report run_filter(const PipelineConfig& cfg,
                  const std::filesystem::path& detections_path,
                  const std::optional<EgoVelocity>& velocity,
                  const std::filesystem::path& out_dir);

/// propagate: detections -> uncertain.txt with per-point anisotropic
/// Cartesian covariances.
Report run_propagate(const PipelineConfig& cfg,
                     const std::filesystem::path& detections_path,
                     const std::filesystem::path& out_dir);

/// evaluate: cloud vs reference -> metrics_report.txt. The single-line
/// record `cd f precision recall cpr` is the "record" report entry.
Report run_evaluate(const PipelineConfig& cfg,
                    const std::filesystem::path& cloud_path,
                    const std::filesystem::path& reference_path,
                    const std::filesystem::path& out_dir);

/// register: two uncertain cloud files -> register_report.txt with the
/// record `tx ty tz qw qx qy qz cost iters`.
Report run_register(const PipelineConfig& cfg,
                    const std::filesystem::path& source_path,
                    const std::filesystem::path& target_path,
                    const std::filesystem::path& out_dir);

/// eve: RANSAC ego-velocity from a detection file -> velocity.txt and
/// eve_report.txt.
Report run_eve(const PipelineConfig& cfg,
               const std::filesystem::path& detections_path,
               const std::filesystem::path& out_dir);

/// bdaf-check: gradient-check suite over `instances` seeded random shapes;
/// reports the worst relative error -> bdaf_report.txt.
Report run_bdaf_check(std::uint64_t seed, std::size_t instances,
                      const std::filesystem::path& out_dir);

/// pipeline: simulate -> detect -> filter -> propagate -> evaluate, scoring
/// the detection cloud against the true scatterers both before and after
/// the Doppler gate; consolidated report -> report.txt.
Report run_pipeline(const PipelineConfig& cfg,
                    const std::filesystem::path& out_dir);

}  // namespace rauf
