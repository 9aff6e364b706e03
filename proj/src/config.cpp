#include "berrypick/errors.hpp"
#include "berrypick/pipeline.hpp"
#include "json_util.hpp"

namespace berrypick {

using nlohmann::json;

void validate(const PipelineConfig &cfg) {
  if (cfg.median_window < 3 || cfg.median_window % 2 == 0)
    throw ParameterError("median_window must be odd and >= 3");
  validate(cfg.voxel);
  validate(cfg.outlier);
  validate(cfg.loss_weights);
  validate(cfg.icp);
  if (!(cfg.grid_resolution > 0))
    throw ParameterError("grid_resolution must be > 0");
  if (cfg.inflation < 0)
    throw ParameterError("inflation must be >= 0");
  if (!(cfg.gripper_radius > 0))
    throw ParameterError("gripper_radius must be > 0");
  if (!(cfg.grasp_tolerance > 0))
    throw ParameterError("grasp_tolerance must be > 0");
  if (!cfg.p_ee.allFinite())
    throw ParameterError("p_ee must be finite");
}

json to_json(const PipelineConfig &c) {
  return {
      {"median_window", c.median_window},
      {"voxel", {{"voxel_size", c.voxel.voxel_size}, {"min_points", c.voxel.min_points}}},
      {"outlier",
       {{"k_neighbors", c.outlier.k_neighbors}, {"std_ratio", c.outlier.std_ratio}}},
      {"loss_weights",
       {{"lambda0", c.loss_weights.lambda0},
        {"lambda1", c.loss_weights.lambda1},
        {"lambda2", c.loss_weights.lambda2}}},
      {"icp",
       {{"max_iterations", c.icp.max_iterations},
        {"convergence_tol_mm", c.icp.convergence_tol_mm},
        {"max_correspondence_dist_mm", c.icp.max_correspondence_dist_mm},
        {"restart_count", c.icp.restart_count}}},
      {"grid_resolution", c.grid_resolution},
      {"inflation", c.inflation},
      {"gripper_radius", c.gripper_radius},
      {"grasp_tolerance", c.grasp_tolerance},
      {"p_ee", {c.p_ee.x(), c.p_ee.y(), c.p_ee.z()}},
      {"use_completion", c.use_completion},
      {"use_obstacles", c.use_obstacles},
      {"rng_seed", c.rng_seed},
  };
}

PipelineConfig pipeline_config_from_json(const json &j) {
  using detail::check_keys;
  using detail::read_opt;
  check_keys(j,
             {"median_window", "voxel", "outlier", "loss_weights", "icp",
              "grid_resolution", "inflation", "gripper_radius",
              "grasp_tolerance", "p_ee", "use_completion", "use_obstacles",
              "rng_seed"},
             "config");
  PipelineConfig c;
  read_opt(j, "median_window", c.median_window, "config");
  if (j.contains("voxel")) {
    const auto &v = j["voxel"];
    check_keys(v, {"voxel_size", "min_points"}, "config.voxel");
    read_opt(v, "voxel_size", c.voxel.voxel_size, "config.voxel");
    read_opt(v, "min_points", c.voxel.min_points, "config.voxel");
  }
  if (j.contains("outlier")) {
    const auto &o = j["outlier"];
    check_keys(o, {"k_neighbors", "std_ratio"}, "config.outlier");
    read_opt(o, "k_neighbors", c.outlier.k_neighbors, "config.outlier");
    read_opt(o, "std_ratio", c.outlier.std_ratio, "config.outlier");
  }
  if (j.contains("loss_weights")) {
    const auto &w = j["loss_weights"];
    check_keys(w, {"lambda0", "lambda1", "lambda2"}, "config.loss_weights");
    read_opt(w, "lambda0", c.loss_weights.lambda0, "config.loss_weights");
    read_opt(w, "lambda1", c.loss_weights.lambda1, "config.loss_weights");
    read_opt(w, "lambda2", c.loss_weights.lambda2, "config.loss_weights");
  }
  if (j.contains("icp")) {
    const auto &i = j["icp"];
    check_keys(i,
               {"max_iterations", "convergence_tol_mm",
                "max_correspondence_dist_mm", "restart_count"},
               "config.icp");
    read_opt(i, "max_iterations", c.icp.max_iterations, "config.icp");
    read_opt(i, "convergence_tol_mm", c.icp.convergence_tol_mm, "config.icp");
    read_opt(i, "max_correspondence_dist_mm", c.icp.max_correspondence_dist_mm,
             "config.icp");
    read_opt(i, "restart_count", c.icp.restart_count, "config.icp");
  }
  read_opt(j, "grid_resolution", c.grid_resolution, "config");
  read_opt(j, "inflation", c.inflation, "config");
  read_opt(j, "gripper_radius", c.gripper_radius, "config");
  read_opt(j, "grasp_tolerance", c.grasp_tolerance, "config");
  if (j.contains("p_ee")) {
    std::vector<double> p;
    read_opt(j, "p_ee", p, "config");
    if (p.size() != 3)
      throw InputError("config.p_ee: expected [x, y, z]");
    c.p_ee = Vec3(p[0], p[1], p[2]);
  }
  read_opt(j, "use_completion", c.use_completion, "config");
  read_opt(j, "use_obstacles", c.use_obstacles, "config");
  read_opt(j, "rng_seed", c.rng_seed, "config");
  try {
    validate(c);
  } catch (const ParameterError &e) {
    throw InputError(std::string("config: ") + e.what());
  }
  return c;
}

} // namespace berrypick
