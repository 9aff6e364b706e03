#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "berrypick/scene.hpp"
#include "berrypick/types.hpp"

namespace berrypick {

struct RobotState {
  Vec3 p_ee = Vec3(0.0, 0.06, 0.10); // camera frame, meters
  double gripper_radius = 0.015;
};

// A detected instance after (optional) completion. `cloud` is the completed
// dense cloud, or the denoised partial when completion is skipped.
struct PlanningInstance {
  int instance_id = 0;
  Ripeness ripeness = Ripeness::ripe;
  PointCloud cloud;
};

struct ObstacleSet {
  PointCloud points;
};

using Cell = Eigen::Vector3i;

class OccupancyGrid {
public:
  OccupancyGrid() = default;
  OccupancyGrid(Vec3 origin, double resolution, Eigen::Vector3i dims);

  const Vec3 &origin() const noexcept { return origin_; }
  double resolution() const noexcept { return resolution_; }
  const Eigen::Vector3i &dims() const noexcept { return dims_; }
  std::size_t cell_count() const noexcept { return occupied_.size(); }

  bool in_bounds(const Cell &c) const {
    return (c.array() >= 0).all() && (c.array() < dims_.array()).all();
  }
  // Cell containing p, or nullopt outside the grid.
  std::optional<Cell> cell_of(const Vec3 &p) const;
  Vec3 center(const Cell &c) const {
    return origin_ + (c.cast<double>().array() + 0.5).matrix() * resolution_;
  }
  std::size_t linear(const Cell &c) const {
    return (static_cast<std::size_t>(c.z()) * dims_.y() + c.y()) * dims_.x() + c.x();
  }
  Cell unlinear(std::size_t i) const {
    const auto nx = static_cast<std::size_t>(dims_.x());
    const auto ny = static_cast<std::size_t>(dims_.y());
    return {static_cast<int>(i % nx), static_cast<int>((i / nx) % ny),
            static_cast<int>(i / (nx * ny))};
  }
  bool occupied(const Cell &c) const { return occupied_[linear(c)] != 0; }
  void set_occupied(const Cell &c, bool on = true) {
    occupied_[linear(c)] = on ? 1 : 0;
  }
  std::size_t occupied_count() const;

private:
  Vec3 origin_ = Vec3::Zero();
  double resolution_ = 0.005;
  Eigen::Vector3i dims_ = Eigen::Vector3i::Zero();
  std::vector<std::uint8_t> occupied_;
};

struct GraspPose {
  Vec3 grasp_point = Vec3::Zero();
  Vec3 approach_dir = Vec3::UnitZ();
  double pregrasp_offset = 0.034;
  Vec3 pregrasp() const { return grasp_point - pregrasp_offset * approach_dir; }
};

struct Trajectory {
  std::vector<Vec3> waypoints;
  bool feasible = false;
  double length = 0; // meters, along the waypoints
};

struct ExecutionOutcome {
  bool success = false;
  std::vector<int> hits; // sorted non-target instance ids
};

/// Index of the nearest ripe instance by cloud centroid; ties go to the lower
/// instance id. Throws ParameterError when the list is empty and
/// NoTargetError when nothing is ripe.
std::size_t select_target(std::span<const PlanningInstance> instances,
                          const Vec3 &p_ee);

/// Union of every cloud except the target's.
ObstacleSet build_obstacles(std::span<const PlanningInstance> instances,
                            std::size_t target);

/// Rasterises obstacles into a grid spanning their bounding box together with
/// `include` (end-effector, grasp region), padded by inflation + 2 cells. A
/// cell is occupied if it contains an obstacle point or its centre lies
/// within `inflation` of one.
OccupancyGrid build_occupancy(const ObstacleSet &obstacles, double resolution,
                              double inflation, std::span<const Vec3> include);

/// Grasp at the target centroid, approached horizontally (camera x-z plane)
/// from the end-effector's side; stand-off is the prior width plus 1 cm.
GraspPose estimate_grasp(const PointCloud &target, const Vec3 &p_ee,
                         double prior_width);

struct GridPath {
  std::vector<Cell> cells;
  double cost = 0; // meters
};

/// 26-connected A* over free cells with a Euclidean heuristic. Open-list ties
/// on f are broken by the lower linear cell index. nullopt when unreachable
/// or when either endpoint is occupied.
std::optional<GridPath> astar(const OccupancyGrid &grid, const Cell &start,
                              const Cell &goal);

/// p_ee -> pregrasp -> grasp through free cells. Throws ParameterError when
/// an endpoint is outside the grid.
Trajectory plan_trajectory(const GraspPose &grasp, const OccupancyGrid &grid,
                           const RobotState &state);

/// True when every waypoint lies in a free cell.
bool verify_collision_free(const Trajectory &t, const OccupancyGrid &grid);

/// Replays a trajectory against ground truth. Success when the final waypoint
/// is within `grasp_tolerance` of the target's true centre; a non-target is
/// hit when its true surface comes within the gripper radius of any segment.
ExecutionOutcome simulate_execution(const Trajectory &t,
                                    std::span<const InstanceTruth> truth,
                                    int target_id, double gripper_radius,
                                    double grasp_tolerance = 0.01);

} // namespace berrypick
