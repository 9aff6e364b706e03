#include "berrypick/prior.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "berrypick/errors.hpp"

namespace berrypick {

namespace {

double signed_pow(double t, double e) {
  return std::copysign(std::pow(std::abs(t), e), t);
}

constexpr std::uint64_t kDenseSeed = 0x5eedba11;
constexpr int kDenseSamples = 40000;

} // namespace

TriangleMesh make_superellipsoid(const SuperellipsoidParams &p) {
  if (p.rings < 3 || p.segments < 3)
    throw ParameterError("superellipsoid needs >= 3 rings and segments");
  const double pi = std::numbers::pi;
  TriangleMesh mesh;
  // Vertex 0 = south pole, then (rings - 1) rings of `segments` vertices,
  // then the north pole.
  const int n_ring = p.rings - 1;
  mesh.vertices.resize(3, 2 + n_ring * p.segments);
  mesh.vertices.col(0) = Vec3(0, 0, -p.c);
  for (int i = 0; i < n_ring; ++i) {
    const double eta = -pi / 2 + pi * (i + 1) / p.rings;
    const double ce = signed_pow(std::cos(eta), p.e1);
    const double se = signed_pow(std::sin(eta), p.e1);
    for (int j = 0; j < p.segments; ++j) {
      const double omega = -pi + 2 * pi * j / p.segments;
      mesh.vertices.col(1 + i * p.segments + j) =
          Vec3(p.a * ce * signed_pow(std::cos(omega), p.e2),
               p.b * ce * signed_pow(std::sin(omega), p.e2), p.c * se);
    }
  }
  const int north = 1 + n_ring * p.segments;
  mesh.vertices.col(north) = Vec3(0, 0, p.c);

  auto ring_vertex = [&](int i, int j) {
    return 1 + i * p.segments + (j % p.segments);
  };
  for (int j = 0; j < p.segments; ++j)
    mesh.faces.push_back({0, ring_vertex(0, j + 1), ring_vertex(0, j)});
  for (int i = 0; i + 1 < n_ring; ++i) {
    for (int j = 0; j < p.segments; ++j) {
      const int a = ring_vertex(i, j), b = ring_vertex(i, j + 1);
      const int c = ring_vertex(i + 1, j), d = ring_vertex(i + 1, j + 1);
      mesh.faces.push_back({a, b, d});
      mesh.faces.push_back({a, d, c});
    }
  }
  for (int j = 0; j < p.segments; ++j)
    mesh.faces.push_back(
        {north, ring_vertex(n_ring - 1, j), ring_vertex(n_ring - 1, j + 1)});
  return mesh;
}

std::shared_ptr<const StrawberryPrior> StrawberryPrior::builtin() {
  static const auto prior = std::make_shared<const StrawberryPrior>(
      make_superellipsoid({}), Densities{}, true, true);
  return prior;
}

StrawberryPrior::StrawberryPrior(TriangleMesh mesh, Densities densities,
                                 bool axisymmetric, bool mirror_z)
    : mesh_(std::move(mesh)), densities_(densities),
      axisymmetric_(axisymmetric), mirror_z_(mirror_z) {
  if (mesh_.faces.empty() || mesh_.vertices.cols() < 4)
    throw ParameterError("prior mesh is empty");
  if (!(densities_.n0 > 0 && densities_.n0 < densities_.n1 &&
        densities_.n1 < densities_.n2))
    throw ParameterError("prior densities must be positive and ascending");
  canonicalize();
  precompute();
}

void StrawberryPrior::canonicalize() {
  // Outward winding: positive enclosed volume.
  double volume = 0;
  for (const auto &f : mesh_.faces)
    volume += mesh_.vertices.col(f[0]).dot(
        mesh_.vertices.col(f[1]).cross(mesh_.vertices.col(f[2])));
  if (volume < 0)
    for (auto &f : mesh_.faces)
      std::swap(f[1], f[2]);

  double area = 0;
  Vec3 centroid = Vec3::Zero();
  Mat3 second = Mat3::Zero();
  for (const auto &f : mesh_.faces) {
    const Vec3 a = mesh_.vertices.col(f[0]), b = mesh_.vertices.col(f[1]),
               c = mesh_.vertices.col(f[2]);
    const double w = 0.5 * (b - a).cross(c - a).norm();
    const Vec3 m = (a + b + c) / 3.0;
    area += w;
    centroid += w * m;
    second += w * m * m.transpose();
  }
  centroid /= area;
  mesh_.vertices.colwise() -= centroid;

  const Mat3 cov = second / area - centroid * centroid.transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  const Vec3 major = es.eigenvectors().col(2);
  if (std::abs(major.z()) < 1.0 - 1e-9) {
    // Rotate the major axis onto +z.
    const Mat3 r =
        Eigen::Quaterniond::FromTwoVectors(major, Vec3::UnitZ()).toRotationMatrix();
    mesh_.vertices = r * mesh_.vertices;
  }
}

void StrawberryPrior::precompute() {
  const auto &v = mesh_.vertices;
  area_cdf_.clear();
  face_normals_.clear();
  vertex_normals_ = Eigen::Matrix3Xd::Zero(3, v.cols());
  double acc = 0;
  for (const auto &f : mesh_.faces) {
    const Vec3 n = (v.col(f[1]) - v.col(f[0])).cross(v.col(f[2]) - v.col(f[0]));
    const double area = 0.5 * n.norm();
    acc += area;
    area_cdf_.push_back(acc);
    face_normals_.push_back(area > 0 ? Vec3(n.normalized()) : Vec3::UnitZ());
    for (int i : f)
      vertex_normals_.col(i) += n; // area-weighted
  }
  vertex_normals_.colwise().normalize();

  half_extent_ = v.cwiseAbs().rowwise().maxCoeff();
  bounding_radius_ = v.colwise().norm().maxCoeff();

  // Dense reference samples for closest-point queries.
  const CounterRng rng(kDenseSeed);
  Eigen::Matrix3Xd pts(3, kDenseSamples);
  dense_normals_.resize(3, kDenseSamples);
  const double total = area_cdf_.back();
  for (int i = 0; i < kDenseSamples; ++i) {
    const double t = (i + rng.uniform(3 * i)) / kDenseSamples * total;
    const auto fi = static_cast<std::size_t>(
        std::upper_bound(area_cdf_.begin(), area_cdf_.end(), t) -
        area_cdf_.begin());
    const auto &f = mesh_.faces[std::min(fi, mesh_.faces.size() - 1)];
    const double s = std::sqrt(rng.uniform(3 * i + 1));
    const double r = rng.uniform(3 * i + 2);
    const double wa = 1 - s, wb = s * (1 - r), wc = s * r;
    pts.col(i) = wa * v.col(f[0]) + wb * v.col(f[1]) + wc * v.col(f[2]);
    dense_normals_.col(i) = (wa * vertex_normals_.col(f[0]) +
                             wb * vertex_normals_.col(f[1]) +
                             wc * vertex_normals_.col(f[2]))
                                .normalized();
  }
  dense_ = KdTree<double>(std::move(pts));
}

double StrawberryPrior::extent_along(const Vec3 &dir) const {
  const Eigen::RowVectorXd proj = dir.normalized().transpose() * mesh_.vertices;
  return proj.maxCoeff() - proj.minCoeff();
}

PointCloud StrawberryPrior::sample(const Pose &pose, int count,
                                   const CounterRng &rng) const {
  if (count < 0)
    throw ParameterError("negative sample count");
  const auto &v = mesh_.vertices;
  const double total = area_cdf_.back();
  PointCloud out;
  out.points.resize(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const auto c = static_cast<std::uint64_t>(i);
    const double t = (i + rng.uniform(3 * c)) / count * total;
    const auto fi = static_cast<std::size_t>(
        std::upper_bound(area_cdf_.begin(), area_cdf_.end(), t) -
        area_cdf_.begin());
    const auto &f = mesh_.faces[std::min(fi, mesh_.faces.size() - 1)];
    const double s = std::sqrt(rng.uniform(3 * c + 1));
    const double r = rng.uniform(3 * c + 2);
    const Vec3 p =
        (1 - s) * v.col(f[0]) + s * (1 - r) * v.col(f[1]) + s * r * v.col(f[2]);
    out.points[static_cast<std::size_t>(i)].position = pose * p;
  }
  return out;
}

CloudTriple StrawberryPrior::sample_levels(const Pose &pose,
                                           const CounterRng &rng) const {
  return sample_ground_truth(*this, pose, densities_, rng);
}

SurfaceHit StrawberryPrior::closest(const Vec3 &q) const {
  const auto nb = dense_.nearest(q);
  SurfaceHit hit;
  hit.point = dense_.points().col(nb.index);
  hit.normal = dense_normals_.col(nb.index);
  hit.plane_distance = hit.normal.dot(q - hit.point);
  hit.distance = std::sqrt(nb.squared_distance);
  return hit;
}

double StrawberryPrior::rotation_error(const Mat3 &a, const Mat3 &b) const {
  if (axisymmetric_) {
    double c = a.col(2).dot(b.col(2));
    if (mirror_z_)
      c = std::abs(c);
    return std::acos(std::clamp(c, -1.0, 1.0));
  }
  const Eigen::AngleAxisd aa(a.transpose() * b);
  return std::abs(aa.angle());
}

CloudTriple sample_ground_truth(const StrawberryPrior &prior, const Pose &pose,
                                const Densities &d, const CounterRng &rng) {
  if (!(d.n0 > 0 && d.n0 < d.n1 && d.n1 < d.n2))
    throw ParameterError("densities must be ascending");
  return {prior.sample(pose, d.n0, rng.split(0)),
          prior.sample(pose, d.n1, rng.split(1)),
          prior.sample(pose, d.n2, rng.split(2))};
}

} // namespace berrypick
