// Hand-built scenes for the three terminal outcomes of the grasp loop.
#pragma once

#include <numbers>

#include "berrypick/scene.hpp"

namespace fixtures {

using namespace berrypick;

// Prior +z along camera +y (hanging), at camera-frame position c.
inline BerryInstance hanging_berry(int id, Ripeness r, const Vec3 &c) {
  Pose p = Pose::Identity();
  p.linear() = Eigen::AngleAxisd(-std::numbers::pi / 2, Vec3::UnitX()).toRotationMatrix();
  p.translation() = c;
  return {id, r, p};
}

// One unoccluded ripe berry in front of the end-effector.
inline SceneConfig lone_ripe() {
  SceneConfig s;
  s.berries.push_back(hanging_berry(1, Ripeness::ripe, {0.0, 0.0, 0.30}));
  s.rng_seed = 1;
  return s;
}

// Nothing to pick.
inline SceneConfig all_unripe() {
  SceneConfig s;
  s.berries.push_back(hanging_berry(1, Ripeness::unripe, {-0.03, 0.0, 0.30}));
  s.berries.push_back(hanging_berry(2, Ripeness::unripe, {0.03, 0.01, 0.31}));
  s.rng_seed = 2;
  return s;
}

// A ripe berry whose stand-off point is buried in the inflated volume of an
// unripe berry hanging just in front of and above it.
inline SceneConfig blocked_approach() {
  SceneConfig s;
  s.berries.push_back(hanging_berry(1, Ripeness::ripe, {0.0, 0.0, 0.30}));
  s.berries.push_back(hanging_berry(2, Ripeness::unripe, {0.0, -0.025, 0.266}));
  s.rng_seed = 3;
  return s;
}

} // namespace fixtures
