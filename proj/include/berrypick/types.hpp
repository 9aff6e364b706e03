#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace berrypick {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Rigid transform mapping a canonical frame into the camera frame.
using Pose = Eigen::Isometry3d;

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb &, const Rgb &) = default;
};

struct Pixel {
  int u = 0;
  int v = 0;
  friend bool operator==(const Pixel &, const Pixel &) = default;
  friend auto operator<=>(const Pixel &, const Pixel &) = default;
};

enum class Ripeness { ripe, unripe };

std::string_view to_string(Ripeness r);
Ripeness ripeness_from_string(std::string_view s);

struct Point {
  Vec3 position = Vec3::Zero();
  std::optional<Rgb> color;
  std::optional<Pixel> source_pixel;
  std::optional<int> instance_id;
};

struct PointCloud {
  std::vector<Point> points;

  PointCloud() = default;
  explicit PointCloud(std::vector<Point> pts) : points(std::move(pts)) {}

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
  const Point &operator[](std::size_t i) const { return points[i]; }
  Point &operator[](std::size_t i) { return points[i]; }

  // Positions as a 3xN matrix.
  Eigen::Matrix3Xd positions() const;
  Vec3 centroid() const;

  static PointCloud from_positions(const Eigen::Matrix3Xd &xyz);
};

// Applies a rigid transform to every point, keeping the attributes.
PointCloud transformed(const PointCloud &cloud, const Pose &pose);

struct TriangleMesh {
  Eigen::Matrix3Xd vertices;
  std::vector<std::array<int, 3>> faces;
};

// Three clouds of ascending density: level 0 is the sparse seed.
using CloudTriple = std::array<PointCloud, 3>;

struct VoxelParams {
  double voxel_size = 0.005; // meters
  int min_points = 30;
};

struct OutlierParams {
  int k_neighbors = 16;
  double std_ratio = 2.0;
};

struct LossWeights {
  double lambda0 = 1.0;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
};

void validate(const VoxelParams &p);
void validate(const OutlierParams &p);
void validate(const LossWeights &w);

} // namespace berrypick
