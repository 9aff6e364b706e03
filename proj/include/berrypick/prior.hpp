#pragma once

#include <array>
#include <memory>

#include "berrypick/kdtree.hpp"
#include "berrypick/rng.hpp"
#include "berrypick/types.hpp"

namespace berrypick {

// Point counts for the three completion / ground-truth densities.
struct Densities {
  int n0 = 256;
  int n1 = 1024;
  int n2 = 4096;
};

struct SuperellipsoidParams {
  double a = 0.012;   // semi-axis x, meters
  double b = 0.012;   // semi-axis y
  double c = 0.0175;  // semi-axis z (principal axis)
  double e1 = 0.9;    // north-south squareness
  double e2 = 1.0;    // east-west squareness
  int rings = 64;     // latitude subdivisions
  int segments = 128; // longitude subdivisions
};

TriangleMesh make_superellipsoid(const SuperellipsoidParams &p);

// Closest-surface query result in the prior's canonical frame.
struct SurfaceHit {
  Vec3 point;            // nearest dense surface sample
  Vec3 normal;           // outward unit normal there
  double plane_distance; // signed distance along the normal
  double distance;       // Euclidean distance to the sample
};

/// Fixed-shape, fixed-size fruit model in a canonical frame: surface
/// centroid at the origin, principal axis along +z.
class StrawberryPrior {
public:
  /// Superellipsoid berry (24 x 24 x 35 mm).
  static std::shared_ptr<const StrawberryPrior> builtin();

  /// Wraps an arbitrary closed triangle mesh. The mesh is recentred on its
  /// surface centroid and rotated so its largest-variance axis is +z.
  StrawberryPrior(TriangleMesh mesh, Densities densities,
                  bool axisymmetric = false, bool mirror_z = false);

  const TriangleMesh &mesh() const noexcept { return mesh_; }
  const Densities &densities() const noexcept { return densities_; }
  double surface_area() const noexcept { return area_cdf_.back(); }

  /// Half extent along each canonical axis.
  const Vec3 &half_extent() const noexcept { return half_extent_; }
  double bounding_radius() const noexcept { return bounding_radius_; }
  /// Prior width perpendicular to its principal axis.
  double width() const noexcept { return 2.0 * std::max(half_extent_.x(), half_extent_.y()); }

  /// Full extent of the canonical shape along unit direction `dir`.
  double extent_along(const Vec3 &dir) const;

  /// Area-uniform surface samples of the posed prior. Samples are jittered
  /// within equal-area strata, so the count is exact and the sample centroid
  /// tracks the surface centroid closely.
  PointCloud sample(const Pose &pose, int count, const CounterRng &rng) const;
  CloudTriple sample_levels(const Pose &pose, const CounterRng &rng) const;

  /// Nearest point on the canonical surface (dense-sample approximation,
  /// spacing well under 0.5 mm for the builtin prior).
  SurfaceHit closest(const Vec3 &canonical_point) const;

  /// Angle in radians between two poses' orientations, modulo the shape's
  /// rotational symmetries.
  double rotation_error(const Mat3 &a, const Mat3 &b) const;

  bool axisymmetric() const noexcept { return axisymmetric_; }

private:
  void canonicalize();
  void precompute();

  TriangleMesh mesh_;
  Densities densities_;
  bool axisymmetric_;
  bool mirror_z_;
  std::vector<double> area_cdf_;
  std::vector<Vec3> face_normals_;
  Eigen::Matrix3Xd vertex_normals_;
  Vec3 half_extent_ = Vec3::Zero();
  double bounding_radius_ = 0;
  KdTree<double> dense_;
  Eigen::Matrix3Xd dense_normals_;
};

/// Three ground-truth clouds of a posed prior at its densities.
CloudTriple sample_ground_truth(const StrawberryPrior &prior, const Pose &pose,
                                const Densities &densities,
                                const CounterRng &rng);

} // namespace berrypick
