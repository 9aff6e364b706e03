#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "berrypick/completion.hpp"
#include "berrypick/planning.hpp"
#include "berrypick/scene.hpp"

namespace berrypick {

struct PipelineConfig {
  int median_window = 5;
  VoxelParams voxel;
  OutlierParams outlier;
  LossWeights loss_weights;
  IcpParams icp;
  double grid_resolution = 0.005;
  double inflation = 0.015; // absorbs the gripper radius
  double gripper_radius = 0.015;
  double grasp_tolerance = 0.01;
  Vec3 p_ee = RobotState{}.p_ee;
  bool use_completion = true;
  bool use_obstacles = true;
  std::uint64_t rng_seed = 0;
};

void validate(const PipelineConfig &cfg);
nlohmann::json to_json(const PipelineConfig &cfg);
/// Every key is optional; unknown keys throw InputError.
PipelineConfig pipeline_config_from_json(const nlohmann::json &j);

enum class FailureReason { no_ripe, registration_failure, infeasible_path, missed_grasp };

std::string_view to_string(FailureReason r);

struct InstanceScore {
  int instance_id = 0;
  double cd_mm = 0;
};

struct TrialResult {
  int scene_id = 0;
  int detections = 0;
  bool attempted = false;
  bool success = false;
  std::vector<int> hit_ids;
  std::vector<InstanceScore> cd_mm; // per completed instance with ground truth
  std::optional<FailureReason> failure_reason;
  std::optional<int> target_id;
  bool trajectory_verified = false; // waypoints re-checked against the grid

  std::optional<double> cd_mm_mean() const;
};

// Everything run_pipeline needs about one captured scene.
struct SceneArtifacts {
  int scene_id = 0;
  CameraIntrinsics intrinsics;
  RgbImage rgb;
  DepthImage depth;
  std::vector<InstanceMask> masks; // one per detection (oracle segmentation)
  GroundTruth truth;
};

SceneArtifacts make_artifacts(const SceneConfig &scene,
                              const RenderedScene &rendered, int scene_id = 0);

// Scene directory: scene.json, rgb.ppm, depth.pgm, depth_clean.pgm,
// masks/mask_<id>.{pgm,json}, truth/gt_<id>_s{0,1,2}.ply, truth.json.
void save_scene_dir(const std::filesystem::path &dir, const SceneConfig &scene,
                    const RenderedScene &rendered);
SceneArtifacts load_scene_dir(const std::filesystem::path &dir);

struct PipelineOutput {
  TrialResult trial;
  std::vector<PlanningInstance> instances;
  std::optional<GraspPose> grasp;
  Trajectory trajectory;
  std::size_t occupied_cells = 0;
};

/// Runs detection -> projection -> denoise/extract -> completion -> target
/// selection -> occupancy -> grasp -> planning -> simulated execution on one
/// scene. Algorithmic failures are reported in the TrialResult; only missing
/// or inconsistent artifacts throw (InputError).
PipelineOutput run_pipeline_detailed(const SceneArtifacts &scene,
                                     const PipelineConfig &cfg,
                                     const ShapeCompleter &completer);
TrialResult run_pipeline(const SceneArtifacts &scene, const PipelineConfig &cfg);

/// Renders and runs `n_scenes` seeded scenes. Results are ordered by scene id
/// and independent of `threads`.
std::vector<TrialResult> run_benchmark(const SceneTemplate &tmpl, int n_scenes,
                                       const PipelineConfig &cfg,
                                       std::uint64_t seed, int threads = 1);

/// Seed of the i-th benchmark scene.
std::uint64_t benchmark_scene_seed(std::uint64_t seed, int index);

struct MetricsReport {
  double rho_a = 0;
  double rho_s = 0;
  double rho_s_over_a = 0;
  double rho_h = 0;
  double cd_mean = 0;   // mm, NaN when nothing was completed
  double cd_median = 0; // mm
  int trials = 0;
  int detections = 0;
  int attempts = 0;
  int successes = 0;
  int hit_trials = 0;
  int berries_hit = 0;

  friend bool operator==(const MetricsReport &, const MetricsReport &) = default;
};

/// Ratios in percent. Attempts and successes are over detections; hits are
/// trials with any non-target contact over attempts.
MetricsReport compute_metrics(const std::vector<TrialResult> &results);

nlohmann::json to_json(const MetricsReport &r);
MetricsReport metrics_from_json(const nlohmann::json &j);

std::string trials_csv(const std::vector<TrialResult> &results);
std::string comparison_csv(const MetricsReport &baseline,
                           const MetricsReport &variant);

/// Writes metrics.json and trials.csv into `dir`, plus comparison.csv when a
/// baseline report is supplied. Throws IoError on failure.
void emit_report(const MetricsReport &report,
                 const std::vector<TrialResult> &results,
                 const std::filesystem::path &dir,
                 const std::optional<MetricsReport> &baseline = std::nullopt);

} // namespace berrypick
