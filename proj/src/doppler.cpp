#include "rauf/doppler.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <string>

#include "rauf/errors.hpp"
#include "rauf/rng.hpp"

namespace rauf {

namespace {
constexpr double kMinDirectionSingularValue = 1e-6;

Eigen::MatrixXd stack_directions(std::span<const PolarDetection> detections,
                                 std::span<const std::size_t> subset) {
  Eigen::MatrixXd dirs(subset.size(), 3);
  for (std::size_t row = 0; row < subset.size(); ++row) {
    const auto& d = detections[subset[row]];
    dirs.row(row) =
        direction_vector(d.coord.azimuth, d.coord.elevation).transpose();
  }
  return dirs;
}

/// Solves d_i = -u_i^T v over the subset; nullopt when rank deficient.
std::optional<EgoVelocity> solve_subset(
    std::span<const PolarDetection> detections,
    std::span<const std::size_t> subset, double* smallest_sv = nullptr) {
  const Eigen::MatrixXd dirs = stack_directions(detections, subset);
  Eigen::VectorXd rhs(subset.size());
  for (std::size_t row = 0; row < subset.size(); ++row)
    rhs(row) = -detections[subset[row]].doppler;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(dirs,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double sv_min = svd.singularValues().minCoeff();
  if (smallest_sv) *smallest_sv = sv_min;
  if (sv_min <= kMinDirectionSingularValue) return std::nullopt;
  return EgoVelocity(svd.solve(rhs));
}

}  // namespace

void validate_ego_velocity(const EgoVelocity& v, double v_max) {
  if (!v.allFinite())
    throw ConfigError("ego velocity must be finite");
  if (v.norm() > v_max)
    throw ConfigError("ego velocity norm " + std::to_string(v.norm()) +
                      " exceeds v_max " + std::to_string(v_max));
}

double expected_doppler(const EgoVelocity& v, double azimuth, double elevation) {
  return -v.dot(direction_vector(azimuth, elevation));
}

std::vector<ConsistencyVerdict> consistency_filter(
    std::span<const PolarDetection> detections, const EgoVelocity& v,
    double threshold) {
  if (!(threshold > 0.0))
    throw ConfigError("consistency_filter: threshold must be positive");
  std::vector<ConsistencyVerdict> verdicts;
  verdicts.reserve(detections.size());
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const auto& d = detections[i];
    ConsistencyVerdict verdict;
    verdict.detection_index = i;
    verdict.predicted_doppler =
        expected_doppler(v, d.coord.azimuth, d.coord.elevation);
    verdict.residual = d.doppler - verdict.predicted_doppler;
    verdict.inlier = std::abs(verdict.residual) <= threshold;
    verdicts.push_back(verdict);
  }
  return verdicts;
}

EgoVelocity estimate_ego_velocity_ls(
    std::span<const PolarDetection> detections) {
  if (detections.size() < 3)
    throw DegenerateError("estimate_ego_velocity_ls: need at least 3 detections");
  std::vector<std::size_t> all(detections.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  double sv_min = 0.0;
  const auto v = solve_subset(detections, all, &sv_min);
  if (!v)
    throw DegenerateError(
        "estimate_ego_velocity_ls: directions do not span 3-space "
        "(smallest singular value " + std::to_string(sv_min) + ")");
  return *v;
}

void RansacConfig::validate() const {
  if (iterations < 1) throw ConfigError("ransac: iterations must be >= 1");
  if (!(inlier_threshold > 0.0))
    throw ConfigError("ransac: inlier_threshold must be positive");
  if (min_sample < 3) throw ConfigError("ransac: min_sample must be >= 3");
}

RansacResult estimate_ego_velocity_ransac(
    std::span<const PolarDetection> detections, const RansacConfig& cfg) {
  cfg.validate();
  const std::size_t n = detections.size();
  if (n < cfg.min_sample)
    throw DegenerateError("ransac: fewer detections than min_sample");

  const Rng master(cfg.seed);
  bool found = false;
  std::size_t best_count = 0;
  double best_rms = std::numeric_limits<double>::infinity();
  EgoVelocity best_velocity = EgoVelocity::Zero();

  std::vector<std::size_t> sample(cfg.min_sample);
  for (std::size_t iter = 0; iter < cfg.iterations; ++iter) {
    Rng rng = master.derive(iter);
    // distinct indices by rejection
    for (std::size_t s = 0; s < cfg.min_sample; ++s) {
      bool fresh = false;
      while (!fresh) {
        sample[s] = static_cast<std::size_t>(rng.uniform_index(n));
        fresh = true;
        for (std::size_t prev = 0; prev < s; ++prev)
          if (sample[prev] == sample[s]) fresh = false;
      }
    }
    const auto model = solve_subset(detections, sample);
    if (!model) continue;

    std::size_t count = 0;
    double sq_sum = 0.0;
    for (const auto& d : detections) {
      const double residual =
          d.doppler - expected_doppler(*model, d.coord.azimuth, d.coord.elevation);
      if (std::abs(residual) <= cfg.inlier_threshold) {
        ++count;
        sq_sum += residual * residual;
      }
    }
    const double rms =
        count > 0 ? std::sqrt(sq_sum / static_cast<double>(count))
                  : std::numeric_limits<double>::infinity();
    if (count > best_count || (count == best_count && rms < best_rms)) {
      found = true;
      best_count = count;
      best_rms = rms;
      best_velocity = *model;
    }
  }
  if (!found || best_count < cfg.min_sample)
    throw Error("ransac: no sample with spanning geometry produced a model "
                "with >= min_sample inliers after " +
                std::to_string(cfg.iterations) + " iterations");

  // Refit on the consensus set. The winning sample is inside it, so the
  // stacked directions still span 3-space.
  std::vector<std::size_t> consensus;
  consensus.reserve(best_count);
  const auto verdicts =
      consistency_filter(detections, best_velocity, cfg.inlier_threshold);
  for (const auto& verdict : verdicts)
    if (verdict.inlier) consensus.push_back(verdict.detection_index);
  const auto refit = solve_subset(detections, consensus);
  const EgoVelocity final_velocity = refit ? *refit : best_velocity;

  RansacResult result;
  result.velocity = final_velocity;
  result.inlier_mask.assign(n, 0);
  for (const auto& verdict :
       consistency_filter(detections, final_velocity, cfg.inlier_threshold)) {
    if (verdict.inlier) {
      result.inlier_mask[verdict.detection_index] = 1;
      ++result.inlier_count;
    }
  }
  return result;
}

}  // namespace rauf
