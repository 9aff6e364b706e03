#include "berrypick/filters.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>

#include "berrypick/errors.hpp"
#include "berrypick/kdtree.hpp"

namespace berrypick {

std::string_view to_string(Ripeness r) {
  return r == Ripeness::ripe ? "ripe" : "unripe";
}

Ripeness ripeness_from_string(std::string_view s) {
  if (s == "ripe")
    return Ripeness::ripe;
  if (s == "unripe")
    return Ripeness::unripe;
  throw InputError("unknown ripeness label '" + std::string(s) + "'");
}

Eigen::Matrix3Xd PointCloud::positions() const {
  Eigen::Matrix3Xd xyz(3, static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i)
    xyz.col(static_cast<Eigen::Index>(i)) = points[i].position;
  return xyz;
}

Vec3 PointCloud::centroid() const {
  Vec3 c = Vec3::Zero();
  if (points.empty())
    return c;
  for (const auto &p : points)
    c += p.position;
  return c / static_cast<double>(points.size());
}

PointCloud PointCloud::from_positions(const Eigen::Matrix3Xd &xyz) {
  PointCloud out;
  out.points.resize(static_cast<std::size_t>(xyz.cols()));
  for (Eigen::Index i = 0; i < xyz.cols(); ++i)
    out.points[static_cast<std::size_t>(i)].position = xyz.col(i);
  return out;
}

PointCloud transformed(const PointCloud &cloud, const Pose &pose) {
  PointCloud out = cloud;
  for (auto &p : out.points)
    p.position = pose * p.position;
  return out;
}

void validate(const VoxelParams &p) {
  if (!(p.voxel_size > 0) || !std::isfinite(p.voxel_size))
    throw ParameterError("voxel_size must be > 0");
  if (p.min_points < 1)
    throw ParameterError("min_points must be >= 1");
}

void validate(const OutlierParams &p) {
  if (p.k_neighbors < 1)
    throw ParameterError("k_neighbors must be >= 1");
  if (!(p.std_ratio > 0))
    throw ParameterError("std_ratio must be > 0");
}

void validate(const LossWeights &w) {
  if (w.lambda0 < 0 || w.lambda1 < 0 || w.lambda2 < 0)
    throw ParameterError("loss weights must be non-negative");
  if (w.lambda0 + w.lambda1 + w.lambda2 <= 0)
    throw ParameterError("at least one loss weight must be positive");
}

void validate(const CameraIntrinsics &k, int width, int height) {
  if (!(k.fx > 0) || !(k.fy > 0))
    throw ParameterError("focal lengths must be positive");
  if (!(k.cx >= 0 && k.cx < width && k.cy >= 0 && k.cy < height))
    throw ParameterError("principal point outside image");
}

std::size_t InstanceMask::count() const {
  return static_cast<std::size_t>(
      std::count_if(bits.begin(), bits.end(), [](auto b) { return b != 0; }));
}

DepthImage median_filter(const DepthImage &depth, int window) {
  if (window < 3 || window % 2 == 0)
    throw ParameterError("median window must be odd and >= 3, got " +
                         std::to_string(window));
  const int r = window / 2;
  const int total = window * window;
  DepthImage out(depth.width, depth.height);
  std::vector<std::uint16_t> valid;
  valid.reserve(static_cast<std::size_t>(total));
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      valid.clear();
      for (int dv = -r; dv <= r; ++dv) {
        const int vv = std::clamp(v + dv, 0, depth.height - 1);
        for (int du = -r; du <= r; ++du) {
          const int uu = std::clamp(u + du, 0, depth.width - 1);
          const auto d = depth.at(uu, vv);
          if (d != 0)
            valid.push_back(d);
        }
      }
      const int n = static_cast<int>(valid.size());
      if (2 * n <= total) {
        out.at(u, v) = 0;
        continue;
      }
      const auto mid = valid.begin() + (n - 1) / 2;
      std::nth_element(valid.begin(), mid, valid.end());
      out.at(u, v) = *mid;
    }
  }
  return out;
}

PointCloud project_point_cloud(const RgbImage &rgb, const DepthImage &depth,
                               const CameraIntrinsics &k) {
  if (rgb.width != depth.width || rgb.height != depth.height)
    throw ParameterError("rgb and depth dimensions differ");
  PointCloud cloud;
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      const auto d = depth.at(u, v);
      if (d == 0)
        continue;
      const double z = d / 1000.0;
      Point p;
      p.position = {(u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z};
      p.color = rgb.at(u, v);
      p.source_pixel = Pixel{u, v};
      cloud.points.push_back(p);
    }
  }
  return cloud;
}

namespace {

using VoxelKey = std::tuple<std::int64_t, std::int64_t, std::int64_t>;

VoxelKey voxel_of(const Vec3 &p, double size) {
  return {static_cast<std::int64_t>(std::floor(p.x() / size)),
          static_cast<std::int64_t>(std::floor(p.y() / size)),
          static_cast<std::int64_t>(std::floor(p.z() / size))};
}

// Most frequent value among members; ties go to the member nearest the
// centroid (members are pre-sorted by that distance).
template <typename T, typename Get>
std::optional<T> majority(const std::vector<const Point *> &members, Get get) {
  std::map<T, int> counts;
  for (const auto *m : members)
    if (auto v = get(*m))
      ++counts[*v];
  if (counts.empty())
    return std::nullopt;
  int best = 0;
  for (const auto &[_, c] : counts)
    best = std::max(best, c);
  for (const auto *m : members)
    if (auto v = get(*m); v && counts[*v] == best)
      return v;
  return std::nullopt;
}

} // namespace

PointCloud voxel_downsample(const PointCloud &cloud, const VoxelParams &params) {
  validate(params);
  std::map<VoxelKey, std::vector<const Point *>> bins;
  for (const auto &p : cloud.points)
    bins[voxel_of(p.position, params.voxel_size)].push_back(&p);

  PointCloud out;
  for (auto &[key, members] : bins) {
    if (static_cast<int>(members.size()) < params.min_points)
      continue;
    Vec3 c = Vec3::Zero();
    Eigen::Vector3d color = Eigen::Vector3d::Zero();
    int n_color = 0;
    for (const auto *m : members) {
      c += m->position;
      if (m->color) {
        color += Eigen::Vector3d(m->color->r, m->color->g, m->color->b);
        ++n_color;
      }
    }
    c /= static_cast<double>(members.size());
    std::stable_sort(members.begin(), members.end(),
                     [&](const Point *a, const Point *b) {
                       return (a->position - c).squaredNorm() <
                              (b->position - c).squaredNorm();
                     });
    Point q;
    q.position = c;
    if (n_color > 0) {
      color = (color / n_color).array().round();
      q.color = Rgb{static_cast<std::uint8_t>(color.x()),
                    static_cast<std::uint8_t>(color.y()),
                    static_cast<std::uint8_t>(color.z())};
    }
    q.source_pixel = majority<Pixel>(
        members, [](const Point &p) { return p.source_pixel; });
    q.instance_id =
        majority<int>(members, [](const Point &p) { return p.instance_id; });
    out.points.push_back(q);
  }
  return out;
}

PointCloud extract_masked(const PointCloud &cloud, const InstanceMask &mask) {
  PointCloud out;
  for (const auto &p : cloud.points) {
    if (!p.source_pixel)
      throw ContractError("extract_masked: point without source pixel");
    const auto [u, v] = *p.source_pixel;
    if (u < 0 || v < 0 || u >= mask.width || v >= mask.height)
      throw ContractError("extract_masked: source pixel outside mask");
    if (!mask.test(u, v))
      continue;
    Point q = p;
    q.instance_id = mask.instance_id;
    out.points.push_back(q);
  }
  return out;
}

PointCloud remove_outliers(const PointCloud &cloud,
                           const OutlierParams &params) {
  validate(params);
  const auto n = cloud.size();
  const auto k = static_cast<std::size_t>(params.k_neighbors);
  if (n <= k)
    return cloud;

  const KdTree<double> tree(cloud.positions());
  std::vector<double> mean_dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    // k + 1 because the query point finds itself.
    const auto nn = tree.knn(cloud[i].position, static_cast<Eigen::Index>(k + 1));
    double sum = 0;
    std::size_t used = 0;
    for (const auto &nb : nn) {
      if (nb.index == static_cast<Eigen::Index>(i) || used == k)
        continue;
      sum += std::sqrt(nb.squared_distance);
      ++used;
    }
    mean_dist[i] = sum / static_cast<double>(used);
  }
  double mean = 0;
  for (double d : mean_dist)
    mean += d;
  mean /= static_cast<double>(n);
  double var = 0;
  for (double d : mean_dist)
    var += (d - mean) * (d - mean);
  const double stddev = std::sqrt(var / static_cast<double>(n));
  const double threshold = mean + params.std_ratio * stddev;

  PointCloud out;
  for (std::size_t i = 0; i < n; ++i)
    if (mean_dist[i] <= threshold)
      out.points.push_back(cloud[i]);
  return out;
}

} // namespace berrypick
