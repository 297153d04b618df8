#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <vector>

#include "rauf/errors.hpp"
#include "rauf/registration.hpp"
#include "rauf/rng.hpp"
#include "rauf/uncertainty.hpp"

using namespace rauf;

namespace {

double rotation_angle(const Eigen::Matrix3d& r) {
  const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

RigidTransform random_transform(Rng& rng, double angle, double shift) {
  const Eigen::Vector3d axis =
      Eigen::Vector3d(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                      rng.uniform(-1.0, 1.0))
          .normalized();
  RigidTransform t;
  t.rotation = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
  t.translation = Eigen::Vector3d(rng.uniform(-shift, shift),
                                  rng.uniform(-shift, shift),
                                  rng.uniform(-shift, shift));
  return t;
}

// Scatter of well-spread points with matching polar-propagated covariances.
std::vector<UncertainPoint> frustum_cloud(Rng& rng, std::size_t n,
                                          const PolarSigmas& sigmas) {
  std::vector<UncertainPoint> cloud(n);
  for (auto& up : cloud) {
    PolarCoord c;
    c.range = rng.uniform(5.0, 20.0);
    c.azimuth = rng.uniform(-1.0, 1.0);
    c.elevation = rng.uniform(-0.35, 0.35);
    up.mean = polar_to_cartesian(c);
    up.cov = propagate_covariance(c, sigmas);
  }
  return cloud;
}

}  // namespace

TEST_CASE("skew matrix cross-product identity") {
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector3d a(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
                            rng.uniform(-2.0, 2.0));
    const Eigen::Vector3d b(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
                            rng.uniform(-2.0, 2.0));
    CHECK((skew(a) * b - a.cross(b)).norm() < 1e-15);
    CHECK((skew(a) + skew(a).transpose()).norm() == 0.0);
  }
}

TEST_CASE("so3_exp matches axis-angle rotation") {
  CHECK((so3_exp(Eigen::Vector3d::Zero()) - Eigen::Matrix3d::Identity())
            .norm() == 0.0);

  Rng rng(2);
  for (int i = 0; i < 30; ++i) {
    const Eigen::Vector3d axis =
        Eigen::Vector3d(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                        rng.uniform(-1.0, 1.0))
            .normalized();
    const double angle = rng.uniform(1e-14, 3.0);
    const Eigen::Matrix3d expected =
        Eigen::AngleAxisd(angle, axis).toRotationMatrix();
    const Eigen::Matrix3d got = so3_exp(angle * axis);
    CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((got * got.transpose() - Eigen::Matrix3d::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-12);
    CHECK(got.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("rigid transform algebra") {
  Rng rng(3);
  const RigidTransform t = random_transform(rng, 0.8, 2.0);
  CHECK_NOTHROW(t.validate());

  const CartesianPoint p(1.0, -2.0, 0.5);
  const CartesianPoint moved = t.apply(p);
  CHECK((t.inverse().apply(moved) - p).norm() < 1e-14);

  const RigidTransform u = random_transform(rng, 0.4, 1.0);
  // compose applies the right factor first
  CHECK((t.compose(u).apply(p) - t.apply(u.apply(p))).norm() < 1e-14);

  const RigidTransform identity = t.compose(t.inverse());
  CHECK(rotation_angle(identity.rotation) < 1e-14);
  CHECK(identity.translation.norm() < 1e-14);

  RigidTransform bad;
  bad.rotation(0, 0) = 2.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("se3_apply keeps the rotation orthonormal") {
  RigidTransform t;
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    Vector6d update;
    for (int k = 0; k < 6; ++k) update(k) = rng.uniform(-0.2, 0.2);
    t = se3_apply(t, update);
    CHECK((t.rotation * t.rotation.transpose() - Eigen::Matrix3d::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-13);
    CHECK(t.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("se3_step input validation") {
  const std::vector<Eigen::Vector3d> r(5, Eigen::Vector3d::Ones());
  const std::vector<Covariance3> c(4, Covariance3::Identity());
  const std::vector<Eigen::Matrix<double, 3, 6>> j(
      5, Eigen::Matrix<double, 3, 6>::Zero());
  CHECK_THROWS_AS(se3_step(r, c, j), ConfigError);

  const std::vector<Eigen::Vector3d> r2(2, Eigen::Vector3d::Ones());
  const std::vector<Covariance3> c2(2, Covariance3::Identity());
  const std::vector<Eigen::Matrix<double, 3, 6>> j2(
      2, Eigen::Matrix<double, 3, 6>::Zero());
  CHECK_THROWS_AS(se3_step(r2, c2, j2), DegenerateError);
}

TEST_CASE("se3_step solves a pure translation in one step") {
  const Eigen::Vector3d offset(0.4, -0.2, 0.7);
  std::vector<Eigen::Vector3d> residuals;
  std::vector<Covariance3> covariances;
  std::vector<Eigen::Matrix<double, 3, 6>> jacobians;
  Rng rng(5);
  for (int i = 0; i < 10; ++i) {
    const Eigen::Vector3d p(rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0),
                            rng.uniform(-3.0, 3.0));
    residuals.push_back(offset);  // T(p) - q with T = I, q = p - offset
    covariances.push_back(Covariance3::Identity());
    Eigen::Matrix<double, 3, 6> jac;
    jac.block<3, 3>(0, 0) = -skew(p);
    jac.block<3, 3>(0, 3) = Eigen::Matrix3d::Identity();
    jacobians.push_back(jac);
  }
  const Vector6d update = se3_step(residuals, covariances, jacobians);
  // optimal correction is exactly -offset with no rotation
  CHECK(update.head<3>().norm() < 1e-12);
  CHECK((update.tail<3>() + offset).norm() < 1e-12);
}

TEST_CASE("se3_step rejects a rank-deficient normal matrix") {
  // three identical points constrain translation only: 6x6 system is singular
  const Eigen::Vector3d p(1.0, 2.0, 3.0);
  std::vector<Eigen::Vector3d> residuals(3, Eigen::Vector3d(0.1, 0.0, 0.0));
  std::vector<Covariance3> covariances(3, Covariance3::Identity());
  Eigen::Matrix<double, 3, 6> jac;
  jac.block<3, 3>(0, 0) = -skew(p);
  jac.block<3, 3>(0, 3) = Eigen::Matrix3d::Identity();
  std::vector<Eigen::Matrix<double, 3, 6>> jacobians(3, jac);
  CHECK_THROWS_AS(se3_step(residuals, covariances, jacobians),
                  DecompositionError);

  std::vector<Covariance3> bad_cov(3, -Covariance3::Identity());
  CHECK_THROWS_AS(se3_step(residuals, bad_cov, jacobians), DecompositionError);
}

TEST_CASE("registration config validation") {
  RegistrationConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = RegistrationConfig{};
  cfg.convergence_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = RegistrationConfig{};
  cfg.max_correspondence_dist = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = RegistrationConfig{};
  cfg.robust_loss_scale = -0.1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("registering a cloud against itself returns the identity") {
  Rng rng(6);
  const auto cloud = frustum_cloud(rng, 30, {0.1, 0.02, 0.02});
  const RegistrationResult result = register_uncertain(cloud, cloud);
  CHECK(rotation_angle(result.transform.rotation) < 1e-10);
  CHECK(result.transform.translation.norm() < 1e-10);
  CHECK(result.final_cost < 1e-12);
  CHECK(result.correspondences == cloud.size());
  CHECK(result.iterations >= 1);
  CHECK_FALSE(result.cost_history.empty());
}

TEST_CASE("noiseless known transform is recovered to tight tolerance") {
  Rng rng(7);
  const auto target = frustum_cloud(rng, 40, {0.1, 0.02, 0.02});
  const RigidTransform truth = random_transform(rng, 0.05, 0.5);

  // source = T^-1(target) so that T(source) == target
  std::vector<UncertainPoint> source = target;
  const RigidTransform inv = truth.inverse();
  for (auto& up : source) {
    up.mean = inv.apply(up.mean);
    up.cov = inv.rotation * up.cov * inv.rotation.transpose();
  }

  const RegistrationResult result = register_uncertain(source, target);
  const RigidTransform err = result.transform.compose(truth.inverse());
  CHECK(rotation_angle(result.transform.rotation * truth.rotation.transpose()) <
        1e-5);
  CHECK((result.transform.translation - truth.translation).norm() < 1e-6);
  CHECK(rotation_angle(err.rotation) < 1e-5);
}

TEST_CASE("inverse consistency of forward and reverse registration") {
  Rng rng(8);
  const auto target = frustum_cloud(rng, 35, {0.1, 0.02, 0.02});
  const RigidTransform truth = random_transform(rng, 0.04, 0.4);
  std::vector<UncertainPoint> source = target;
  const RigidTransform inv = truth.inverse();
  for (auto& up : source) {
    up.mean = inv.apply(up.mean);
    up.cov = inv.rotation * up.cov * inv.rotation.transpose();
  }

  const RigidTransform forward = register_uncertain(source, target).transform;
  const RigidTransform reverse = register_uncertain(target, source).transform;
  const RigidTransform round = forward.compose(reverse);
  CHECK(rotation_angle(round.rotation) < 1e-5);
  CHECK(round.translation.norm() < 1e-5);
}

TEST_CASE("registration throws without enough points or correspondences") {
  Rng rng(9);
  const auto cloud = frustum_cloud(rng, 10, {0.1, 0.02, 0.02});
  CHECK_THROWS_AS(
      register_uncertain({cloud.data(), 2}, cloud, RegistrationConfig{}),
      DegenerateError);

  // disjoint clouds farther apart than the correspondence cap
  auto far = cloud;
  for (auto& up : far) up.mean += CartesianPoint(500.0, 0.0, 0.0);
  CHECK_THROWS_AS(register_uncertain(cloud, far, RegistrationConfig{}),
                  DegenerateError);
}

TEST_CASE("anisotropic weighting beats identity covariances") {
  // Paired trials under strongly anisotropic polar noise: the weighted
  // estimate must win on both median rotation and translation error.
  Rng rng(10);
  const PolarSigmas sigmas{0.05, 0.03, 0.03};
  const int trials = 24;
  std::vector<double> rot_weighted, rot_identity, trans_weighted, trans_identity;

  for (int trial = 0; trial < trials; ++trial) {
    const RigidTransform truth = random_transform(rng, 0.03, 0.3);
    const RigidTransform inv = truth.inverse();

    std::vector<UncertainPoint> target(45), source(45), source_id(45);
    for (std::size_t i = 0; i < target.size(); ++i) {
      PolarCoord c;
      c.range = rng.uniform(5.0, 20.0);
      c.azimuth = rng.uniform(-1.0, 1.0);
      c.elevation = rng.uniform(-0.35, 0.35);
      const CartesianPoint truth_point = polar_to_cartesian(c);

      // target measurement: polar noise around the true point
      PolarCoord noisy = c;
      noisy.range += rng.normal(0.0, sigmas.sigma_range);
      noisy.azimuth += rng.normal(0.0, sigmas.sigma_azimuth);
      noisy.elevation += rng.normal(0.0, sigmas.sigma_elevation);
      target[i].mean = polar_to_cartesian(noisy);
      target[i].cov = propagate_covariance(noisy, sigmas);

      // source measurement: the same scatterer seen from the moved frame
      const CartesianPoint src_true = inv.apply(truth_point);
      PolarCoord src_polar = cartesian_to_polar(src_true);
      src_polar.range += rng.normal(0.0, sigmas.sigma_range);
      src_polar.azimuth += rng.normal(0.0, sigmas.sigma_azimuth);
      src_polar.elevation += rng.normal(0.0, sigmas.sigma_elevation);
      source[i].mean = polar_to_cartesian(src_polar);
      source[i].cov = propagate_covariance(src_polar, sigmas);

      source_id[i].mean = source[i].mean;
      source_id[i].cov = Covariance3::Identity();
    }
    std::vector<UncertainPoint> target_id = target;
    for (auto& up : target_id) up.cov = Covariance3::Identity();

    const RigidTransform weighted =
        register_uncertain(source, target).transform;
    const RigidTransform plain =
        register_uncertain(source_id, target_id).transform;

    rot_weighted.push_back(
        rotation_angle(weighted.rotation * truth.rotation.transpose()));
    trans_weighted.push_back((weighted.translation - truth.translation).norm());
    rot_identity.push_back(
        rotation_angle(plain.rotation * truth.rotation.transpose()));
    trans_identity.push_back((plain.translation - truth.translation).norm());
  }

  const auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  CHECK(median(rot_weighted) < median(rot_identity));
  CHECK(median(trans_weighted) < median(trans_identity));
}

TEST_CASE("huber weighting tolerates gross outliers") {
  Rng rng(11);
  const auto target = frustum_cloud(rng, 40, {0.1, 0.02, 0.02});
  const RigidTransform truth = random_transform(rng, 0.03, 0.3);
  const RigidTransform inv = truth.inverse();
  std::vector<UncertainPoint> source = target;
  for (auto& up : source) {
    up.mean = inv.apply(up.mean);
    up.cov = inv.rotation * up.cov * inv.rotation.transpose();
  }
  // corrupt a few source points within the correspondence radius
  for (int k = 0; k < 4; ++k)
    source[static_cast<std::size_t>(k) * 7].mean +=
        CartesianPoint(0.9, -0.8, 0.5);

  RegistrationConfig robust;
  robust.robust_loss_scale = 1.0;
  const RigidTransform with_huber =
      register_uncertain(source, target, robust).transform;
  const RigidTransform without =
      register_uncertain(source, target).transform;

  const double err_huber =
      (with_huber.translation - truth.translation).norm() +
      rotation_angle(with_huber.rotation * truth.rotation.transpose());
  const double err_plain =
      (without.translation - truth.translation).norm() +
      rotation_angle(without.rotation * truth.rotation.transpose());
  CHECK(err_huber < err_plain);
}
