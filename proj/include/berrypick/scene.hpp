#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <json.hpp>

#include "berrypick/image.hpp"
#include "berrypick/prior.hpp"
#include "berrypick/types.hpp"

namespace berrypick {

struct BerryInstance {
  int instance_id = 0;
  Ripeness ripeness = Ripeness::ripe;
  Pose pose = Pose::Identity(); // prior frame -> world
};

// Opaque planar ellipse lying in the local xy plane of `pose`.
struct Occluder {
  Pose pose = Pose::Identity();
  double semi_major = 0.02; // along local x, meters
  double semi_minor = 0.01; // along local y
};

struct CameraSetup {
  CameraIntrinsics intrinsics;
  int width = 640;
  int height = 480;
  Pose pose = Pose::Identity(); // camera -> world
};

struct NoiseParams {
  double depth_sigma_mm = 2.0;
  double dropout_rate = 0.05;
};

struct SceneConfig {
  std::vector<BerryInstance> berries;
  std::vector<Occluder> occluders;
  CameraSetup camera;
  NoiseParams noise;
  std::uint64_t rng_seed = 0;
};

struct Range {
  double lo = 0;
  double hi = 0;
};

/// Layout parameters for random scene generation. Lengths in meters, camera
/// frame (x right, y down, z forward).
struct SceneTemplate {
  int n_berries = 5;
  int n_leaves_min = 0;
  int n_leaves_max = 0;
  double clutter_spacing = 0.01;
  double ripe_fraction = 0.5;
  int min_ripe = 0;
  Range region_x{-0.05, 0.05};
  Range region_y{-0.04, 0.04};
  Range region_z{0.26, 0.36};
  double max_tilt_deg = 20.0;
  Range leaf_semi_major{0.015, 0.026};
  Range leaf_semi_minor{0.009, 0.015};
  Range leaf_gap{0.03, 0.05};     // leaf distance in front of its berry
  double leaf_lateral = 0.018;    // max lateral offset from the berry's ray
  double leaf_max_tilt_deg = 25.0;
  CameraSetup camera;
  NoiseParams noise;
  int max_attempts = 2000;
};

struct InstanceTruth {
  int instance_id = 0;
  Ripeness ripeness = Ripeness::ripe;
  Pose pose = Pose::Identity(); // prior frame -> camera frame
  Vec3 center = Vec3::Zero();   // camera frame
  CloudTriple clouds;           // S0, S1, S2 in camera frame
  InstanceMask mask;
  std::size_t visible_pixels = 0;
  std::size_t unoccluded_pixels = 0;
  double visibility = 0;
};

struct GroundTruth {
  std::vector<InstanceTruth> instances;
  DepthImage clean_depth; // before noise and dropout
};

struct RenderedScene {
  RgbImage rgb;
  DepthImage depth;
  GroundTruth truth;
};

/// Deterministic scene layout under `seed`. Berries are placed by rejection
/// sampling so their bounding capsules keep `clutter_spacing` apart; throws
/// GenerationError when placement is infeasible within `max_attempts`.
SceneConfig generate_scene(const SceneTemplate &tmpl, std::uint64_t seed);

/// Ray-casts the scene and applies sensor noise.
RenderedScene render_rgbd(const SceneConfig &scene,
                          const StrawberryPrior &prior = *StrawberryPrior::builtin());

// Colours used by the renderer.
inline constexpr Rgb kRipeColor{190, 25, 35};
inline constexpr Rgb kUnripeColor{150, 195, 95};
inline constexpr Rgb kLeafColor{35, 95, 40};

// JSON mapping. Parsing rejects unknown keys.
nlohmann::json to_json(const SceneConfig &scene);
SceneConfig scene_from_json(const nlohmann::json &j);
nlohmann::json to_json(const SceneTemplate &tmpl);
SceneTemplate template_from_json(const nlohmann::json &j);
nlohmann::json pose_to_json(const Pose &pose);
Pose pose_from_json(const nlohmann::json &j);

} // namespace berrypick
