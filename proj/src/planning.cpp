#include "berrypick/planning.hpp"

#include <cmath>
#include <limits>
#include <queue>

#include "berrypick/errors.hpp"
#include "geom_util.hpp"

namespace berrypick {

OccupancyGrid::OccupancyGrid(Vec3 origin, double resolution,
                             Eigen::Vector3i dims)
    : origin_(std::move(origin)), resolution_(resolution), dims_(dims) {
  if (!(resolution > 0))
    throw ParameterError("grid resolution must be > 0");
  if ((dims.array() <= 0).any())
    throw ParameterError("grid dimensions must be positive");
  occupied_.assign(static_cast<std::size_t>(dims.x()) * dims.y() * dims.z(), 0);
}

std::optional<Cell> OccupancyGrid::cell_of(const Vec3 &p) const {
  const Eigen::Array3d f = ((p - origin_) / resolution_).array().floor();
  if ((f < 0).any() || (f >= dims_.cast<double>().array()).any())
    return std::nullopt;
  return Cell(f.cast<int>());
}

std::size_t OccupancyGrid::occupied_count() const {
  return static_cast<std::size_t>(
      std::count(occupied_.begin(), occupied_.end(), std::uint8_t{1}));
}

std::size_t select_target(std::span<const PlanningInstance> instances,
                          const Vec3 &p_ee) {
  if (instances.empty())
    throw ParameterError("select_target: no instances");
  std::optional<std::size_t> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto &inst = instances[i];
    if (inst.ripeness != Ripeness::ripe || inst.cloud.empty())
      continue;
    const double d = (inst.cloud.centroid() - p_ee).norm();
    if (!best || d < best_dist ||
        (d == best_dist && inst.instance_id < instances[*best].instance_id)) {
      best = i;
      best_dist = d;
    }
  }
  if (!best)
    throw NoTargetError("no ripe instance to target");
  return *best;
}

ObstacleSet build_obstacles(std::span<const PlanningInstance> instances,
                            std::size_t target) {
  if (target >= instances.size())
    throw ParameterError("build_obstacles: target index out of range");
  ObstacleSet o;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (i == target)
      continue;
    for (const auto &p : instances[i].cloud.points)
      o.points.points.push_back(p);
  }
  return o;
}

OccupancyGrid build_occupancy(const ObstacleSet &obstacles, double resolution,
                              double inflation,
                              std::span<const Vec3> include) {
  if (!(resolution > 0))
    throw ParameterError("grid resolution must be > 0");
  if (inflation < 0)
    throw ParameterError("inflation must be >= 0");
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const auto &p : obstacles.points.points) {
    lo = lo.cwiseMin(p.position);
    hi = hi.cwiseMax(p.position);
  }
  for (const auto &p : include) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  if (!lo.allFinite()) {
    lo.setZero();
    hi.setZero();
  }
  const double pad = inflation + 2 * resolution;
  const Vec3 origin = lo - Vec3::Constant(pad);
  const Eigen::Vector3i dims =
      ((hi - origin + Vec3::Constant(pad)) / resolution)
          .array()
          .floor()
          .cast<int>()
          .matrix() +
      Eigen::Vector3i::Ones();
  OccupancyGrid grid(origin, resolution, dims);

  const int reach = static_cast<int>(std::ceil(inflation / resolution)) + 1;
  const double infl2 = inflation * inflation;
  for (const auto &p : obstacles.points.points) {
    const auto c = grid.cell_of(p.position);
    if (!c)
      continue; // cannot happen: bounds cover every point
    grid.set_occupied(*c);
    if (inflation <= 0)
      continue;
    for (int dz = -reach; dz <= reach; ++dz)
      for (int dy = -reach; dy <= reach; ++dy)
        for (int dx = -reach; dx <= reach; ++dx) {
          const Cell n = *c + Cell(dx, dy, dz);
          if (!grid.in_bounds(n))
            continue;
          if ((grid.center(n) - p.position).squaredNorm() <= infl2)
            grid.set_occupied(n);
        }
  }
  return grid;
}

GraspPose estimate_grasp(const PointCloud &target, const Vec3 &p_ee,
                         double prior_width) {
  if (target.empty())
    throw ParameterError("estimate_grasp: empty target cloud");
  GraspPose g;
  g.grasp_point = target.centroid();
  const Vec3 d = g.grasp_point - p_ee;
  if (d.norm() < 1e-9)
    throw GeometryError("target coincides with the end-effector");
  const Vec3 horizontal(d.x(), 0.0, d.z());
  if (horizontal.norm() < 1e-9)
    throw GeometryError("no horizontal approach to a target straight above or below");
  g.approach_dir = horizontal.normalized();
  g.pregrasp_offset = prior_width + 0.01;
  return g;
}

std::optional<GridPath> astar(const OccupancyGrid &grid, const Cell &start,
                              const Cell &goal) {
  if (!grid.in_bounds(start) || !grid.in_bounds(goal))
    throw ParameterError("astar: endpoint outside grid");
  if (grid.occupied(start) || grid.occupied(goal))
    return std::nullopt;

  const double res = grid.resolution();
  const Vec3 goal_c = grid.center(goal);
  const auto n = grid.cell_count();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> g(n, inf);
  std::vector<std::int64_t> parent(n, -1);
  std::vector<std::uint8_t> closed(n, 0);

  using Entry = std::pair<double, std::size_t>; // (f, linear index)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  const auto s = grid.linear(start), t = grid.linear(goal);
  g[s] = 0;
  open.push({(grid.center(start) - goal_c).norm(), s});

  double step_cost[27];
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        step_cost[(dz + 1) * 9 + (dy + 1) * 3 + dx + 1] =
            res * std::sqrt(double(dx * dx + dy * dy + dz * dz));

  while (!open.empty()) {
    const auto [f, idx] = open.top();
    open.pop();
    if (closed[idx])
      continue;
    closed[idx] = 1;
    if (idx == t)
      break;
    const Cell c = grid.unlinear(idx);
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0 && dz == 0)
            continue;
          const Cell nb = c + Cell(dx, dy, dz);
          if (!grid.in_bounds(nb) || grid.occupied(nb))
            continue;
          const auto ni = grid.linear(nb);
          if (closed[ni])
            continue;
          const double cand = g[idx] + step_cost[(dz + 1) * 9 + (dy + 1) * 3 + dx + 1];
          if (cand < g[ni]) {
            g[ni] = cand;
            parent[ni] = static_cast<std::int64_t>(idx);
            open.push({cand + (grid.center(nb) - goal_c).norm(), ni});
          }
        }
  }
  if (!closed[t])
    return std::nullopt;
  GridPath path;
  path.cost = g[t];
  for (auto i = static_cast<std::int64_t>(t); i != -1;
       i = parent[static_cast<std::size_t>(i)])
    path.cells.push_back(grid.unlinear(static_cast<std::size_t>(i)));
  std::reverse(path.cells.begin(), path.cells.end());
  return path;
}

Trajectory plan_trajectory(const GraspPose &grasp, const OccupancyGrid &grid,
                           const RobotState &state) {
  const auto start = grid.cell_of(state.p_ee);
  const auto mid = grid.cell_of(grasp.pregrasp());
  const auto goal = grid.cell_of(grasp.grasp_point);
  if (!start || !mid || !goal)
    throw ParameterError("plan_trajectory: endpoint outside grid");

  Trajectory traj;
  const auto leg1 = astar(grid, *start, *mid);
  if (!leg1)
    return traj;
  const auto leg2 = astar(grid, *mid, *goal);
  if (!leg2)
    return traj;

  std::vector<Cell> cells = leg1->cells;
  cells.insert(cells.end(), leg2->cells.begin() + 1, leg2->cells.end());
  traj.waypoints.push_back(state.p_ee);
  for (std::size_t i = 1; i + 1 < cells.size(); ++i)
    traj.waypoints.push_back(grid.center(cells[i]));
  traj.waypoints.push_back(grasp.grasp_point);
  for (std::size_t i = 1; i < traj.waypoints.size(); ++i)
    traj.length += (traj.waypoints[i] - traj.waypoints[i - 1]).norm();
  traj.feasible = true;
  return traj;
}

bool verify_collision_free(const Trajectory &t, const OccupancyGrid &grid) {
  for (const auto &w : t.waypoints) {
    const auto c = grid.cell_of(w);
    if (!c || grid.occupied(*c))
      return false;
  }
  return true;
}

ExecutionOutcome simulate_execution(const Trajectory &t,
                                    std::span<const InstanceTruth> truth,
                                    int target_id, double gripper_radius,
                                    double grasp_tolerance) {
  ExecutionOutcome out;
  if (!t.feasible || t.waypoints.empty())
    return out;
  const InstanceTruth *target = nullptr;
  for (const auto &inst : truth)
    if (inst.instance_id == target_id)
      target = &inst;
  if (!target)
    throw ParameterError("simulate_execution: unknown target id");
  out.success = (t.waypoints.back() - target->center).norm() <= grasp_tolerance;

  const double r2 = gripper_radius * gripper_radius;
  for (const auto &inst : truth) {
    if (inst.instance_id == target_id)
      continue;
    const auto &surface = inst.clouds[2];
    double reach = 0; // bounding radius of the true surface about its centre
    for (const auto &p : surface.points)
      reach = std::max(reach, (p.position - inst.center).norm());
    const double cull = (reach + gripper_radius) * (reach + gripper_radius);
    bool hit = false;
    for (std::size_t s = 0; s + 1 < t.waypoints.size() && !hit; ++s) {
      const Vec3 &a = t.waypoints[s], &b = t.waypoints[s + 1];
      if (detail::point_segment_sq(inst.center, a, b) > cull)
        continue;
      for (const auto &p : surface.points)
        if (detail::point_segment_sq(p.position, a, b) <= r2) {
          hit = true;
          break;
        }
    }
    if (hit)
      out.hits.push_back(inst.instance_id);
  }
  std::sort(out.hits.begin(), out.hits.end());
  return out;
}

} // namespace berrypick
