#include <doctest.h>

#include <numbers>

#include "berrypick/errors.hpp"
#include "berrypick/prior.hpp"

using namespace berrypick;

namespace {

Pose make_pose(const Vec3 &axis, double angle, const Vec3 &t) {
  Pose p = Pose::Identity();
  p.linear() = Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
  p.translation() = t;
  return p;
}

} // namespace

TEST_CASE("builtin prior dimensions") {
  const auto prior = StrawberryPrior::builtin();
  CHECK(prior->half_extent().x() == doctest::Approx(0.012).epsilon(0.01));
  CHECK(prior->half_extent().y() == doctest::Approx(0.012).epsilon(0.01));
  CHECK(prior->half_extent().z() == doctest::Approx(0.0175).epsilon(0.01));
  CHECK(prior->width() == doctest::Approx(0.024).epsilon(0.01));
  CHECK(prior->extent_along(Vec3::UnitZ()) == doctest::Approx(0.035).epsilon(0.01));
  CHECK(prior->surface_area() > 0);
}

TEST_CASE("ground truth sampling: counts, centroid, determinism") {
  const auto prior = StrawberryPrior::builtin();
  const CounterRng rng(7);
  const auto s = sample_ground_truth(*prior, Pose::Identity(), prior->densities(), rng);
  CHECK(s[0].size() == 256);
  CHECK(s[1].size() == 1024);
  CHECK(s[2].size() == 4096);
  CHECK(s[0].centroid().norm() < 0.001);

  const auto again = sample_ground_truth(*prior, Pose::Identity(), prior->densities(), rng);
  for (int l = 0; l < 3; ++l)
    CHECK(again[l].positions() == s[l].positions());

  const Pose shifted = make_pose(Vec3::UnitX(), 0, Vec3(0.1, 0, 0));
  const auto moved = sample_ground_truth(*prior, shifted, prior->densities(), rng);
  CHECK((moved[0].centroid() - s[0].centroid() - Vec3(0.1, 0, 0)).norm() < 0.001);
}

TEST_CASE("samples lie on the posed surface") {
  const auto prior = StrawberryPrior::builtin();
  const Pose pose = make_pose(Vec3(1, 2, 3), 0.7, Vec3(0.02, -0.01, 0.3));
  const auto s = prior->sample(pose, 2000, CounterRng(3));
  for (const auto &p : s.points) {
    const auto hit = prior->closest(pose.inverse() * p.position);
    CHECK(std::abs(hit.plane_distance) < 1e-4);
  }
}

TEST_CASE("rotation error respects the symmetry of the builtin prior") {
  const auto prior = StrawberryPrior::builtin();
  const Mat3 spin = Eigen::AngleAxisd(1.2, Vec3::UnitZ()).toRotationMatrix();
  CHECK(prior->rotation_error(Mat3::Identity(), spin) == doctest::Approx(0.0));
  const Mat3 flip = Eigen::AngleAxisd(std::numbers::pi, Vec3::UnitX()).toRotationMatrix();
  CHECK(prior->rotation_error(Mat3::Identity(), flip) == doctest::Approx(0.0).epsilon(1e-7));
  const Mat3 tilt = Eigen::AngleAxisd(0.3, Vec3::UnitY()).toRotationMatrix();
  CHECK(prior->rotation_error(Mat3::Identity(), tilt) == doctest::Approx(0.3));
}

TEST_CASE("custom meshes are canonicalised") {
  // Long axis along x; the prior must put it on z and centre it.
  TriangleMesh m = make_superellipsoid({0.03, 0.01, 0.015, 1, 1, 24, 48});
  const Mat3 r = Eigen::AngleAxisd(std::numbers::pi / 2, Vec3::UnitY()).toRotationMatrix();
  m.vertices = r * m.vertices;
  m.vertices.colwise() += Vec3(0.5, -0.2, 0.1);
  const StrawberryPrior prior(m, Densities{});
  CHECK(prior.half_extent().z() == doctest::Approx(0.03).epsilon(0.01));
  CHECK(prior.half_extent().x() < 0.0155);
  const auto s = prior.sample(Pose::Identity(), 4096, CounterRng(1));
  CHECK(s.centroid().norm() < 0.001);
  CHECK(!prior.axisymmetric());
  const Mat3 a = Eigen::AngleAxisd(0.4, Vec3(1, 1, 0).normalized()).toRotationMatrix();
  CHECK(prior.rotation_error(Mat3::Identity(), a) == doctest::Approx(0.4));
}

TEST_CASE("prior rejects bad input") {
  CHECK_THROWS_AS(StrawberryPrior(TriangleMesh{}, Densities{}), ParameterError);
  CHECK_THROWS_AS(StrawberryPrior(make_superellipsoid({}), Densities{10, 5, 20}),
                  ParameterError);
  CHECK_THROWS_AS(make_superellipsoid({0.01, 0.01, 0.01, 1, 1, 2, 2}), ParameterError);
}
