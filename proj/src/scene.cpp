#include "berrypick/scene.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "berrypick/errors.hpp"
#include "berrypick/rng.hpp"
#include "geom_util.hpp"
#include "json_util.hpp"

namespace berrypick {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Random-stream identifiers derived from the scene seed.
enum Stream : std::uint64_t {
  kLayoutStream = 1,
  kDropoutStream = 2,
  kDepthNoiseStream = 3,
  kTruthStream = 4,
};

// Capsule enclosing the posed prior, used for non-interpenetration tests.
struct Capsule {
  Vec3 a, b;
  double radius;
};

Capsule bounding_capsule(const StrawberryPrior &prior, const Pose &pose) {
  const Vec3 &h = prior.half_extent();
  const double r = std::max(h.x(), h.y());
  const double half_len = std::max(0.0, h.z() - r);
  return {pose * Vec3(0, 0, -half_len), pose * Vec3(0, 0, half_len),
          r + 0.0005};
}

double capsule_gap(const Capsule &x, const Capsule &y) {
  return std::sqrt(detail::segment_segment_sq(x.a, x.b, y.a, y.b)) -
         x.radius - y.radius;
}

Vec3 random_unit_perpendicular(const Vec3 &n, RngStream &rng) {
  Vec3 e1 = n.unitOrthogonal();
  Vec3 e2 = n.cross(e1);
  const double phi = rng.uniform(0, 2 * std::numbers::pi);
  return std::cos(phi) * e1 + std::sin(phi) * e2;
}

Mat3 hanging_rotation(double max_tilt, RngStream &rng) {
  // Prior +z hangs along camera +y, spun about its own axis, then tilted
  // about a random horizontal axis.
  const Mat3 spin =
      Eigen::AngleAxisd(rng.uniform(0, 2 * std::numbers::pi), Vec3::UnitZ())
          .toRotationMatrix();
  const Mat3 hang =
      Eigen::AngleAxisd(-std::numbers::pi / 2, Vec3::UnitX()).toRotationMatrix();
  const double phi = rng.uniform(0, 2 * std::numbers::pi);
  const Vec3 axis(std::cos(phi), 0, std::sin(phi));
  const Mat3 tilt =
      Eigen::AngleAxisd(rng.uniform(0, max_tilt), axis).toRotationMatrix();
  return tilt * hang * spin;
}

Pose make_pose(const Mat3 &r, const Vec3 &t) {
  Pose p = Pose::Identity();
  p.linear() = r;
  p.translation() = t;
  return p;
}

void validate(const SceneTemplate &t) {
  if (t.n_berries < 1)
    throw ParameterError("scene template must request at least one berry");
  if (t.n_leaves_min < 0 || t.n_leaves_max < t.n_leaves_min)
    throw ParameterError("bad leaf count range");
  if (t.clutter_spacing < 0)
    throw ParameterError("clutter_spacing must be >= 0");
  if (t.ripe_fraction < 0 || t.ripe_fraction > 1)
    throw ParameterError("ripe_fraction must be in [0, 1]");
  if (t.min_ripe < 0 || t.min_ripe > t.n_berries)
    throw ParameterError("min_ripe must be in [0, n_berries]");
  if (t.region_z.lo <= 0)
    throw ParameterError("berry region must lie in front of the camera");
  if (t.camera.width <= 0 || t.camera.height <= 0)
    throw ParameterError("camera dimensions must be positive");
  validate(t.camera.intrinsics, t.camera.width, t.camera.height);
}

} // namespace

SceneConfig generate_scene(const SceneTemplate &tmpl, std::uint64_t seed) {
  validate(tmpl);
  const auto &prior = *StrawberryPrior::builtin();
  RngStream rng(CounterRng(seed).split(kLayoutStream));
  const auto &cam = tmpl.camera;

  // Layout happens in the camera frame, then moves to world.
  std::vector<Pose> placed;
  std::vector<Capsule> capsules;
  int attempts = 0;
  while (static_cast<int>(placed.size()) < tmpl.n_berries) {
    if (++attempts > tmpl.max_attempts)
      throw GenerationError("could not place " +
                            std::to_string(tmpl.n_berries) + " berries in " +
                            std::to_string(tmpl.max_attempts) + " attempts");
    const Vec3 c(rng.uniform(tmpl.region_x.lo, tmpl.region_x.hi),
                 rng.uniform(tmpl.region_y.lo, tmpl.region_y.hi),
                 rng.uniform(tmpl.region_z.lo, tmpl.region_z.hi));
    const Pose pose = make_pose(hanging_rotation(tmpl.max_tilt_deg * kDeg, rng), c);
    const auto uv = cam.intrinsics.project(c);
    const double margin = 25.0;
    if (uv.x() < margin || uv.y() < margin || uv.x() > cam.width - margin ||
        uv.y() > cam.height - margin)
      continue;
    const Capsule cap = bounding_capsule(prior, pose);
    bool clear = true;
    for (const auto &other : capsules)
      clear = clear && capsule_gap(cap, other) >= tmpl.clutter_spacing;
    if (!clear)
      continue;
    placed.push_back(pose);
    capsules.push_back(cap);
  }

  SceneConfig scene;
  scene.camera = cam;
  scene.noise = tmpl.noise;
  scene.rng_seed = seed;
  int n_ripe = 0;
  for (int i = 0; i < tmpl.n_berries; ++i) {
    BerryInstance b;
    b.instance_id = i + 1;
    b.ripeness = rng.uniform() < tmpl.ripe_fraction ? Ripeness::ripe
                                                    : Ripeness::unripe;
    n_ripe += b.ripeness == Ripeness::ripe;
    b.pose = cam.pose * placed[static_cast<std::size_t>(i)];
    scene.berries.push_back(b);
  }
  for (auto &b : scene.berries) {
    if (n_ripe >= tmpl.min_ripe)
      break;
    if (b.ripeness == Ripeness::unripe) {
      b.ripeness = Ripeness::ripe;
      ++n_ripe;
    }
  }

  const int n_leaves = rng.integer(tmpl.n_leaves_min, tmpl.n_leaves_max);
  for (int i = 0; i < n_leaves; ++i) {
    const auto &host = placed[static_cast<std::size_t>(
        rng.integer(0, tmpl.n_berries - 1))];
    const Vec3 c = host.translation();
    const Vec3 ray = c.normalized();
    const Vec3 lateral = random_unit_perpendicular(ray, rng) *
                         tmpl.leaf_lateral * std::sqrt(rng.uniform());
    const Vec3 center =
        c - rng.uniform(tmpl.leaf_gap.lo, tmpl.leaf_gap.hi) * ray + lateral;
    const Vec3 tilt_axis = random_unit_perpendicular(ray, rng);
    const Vec3 normal =
        Eigen::AngleAxisd(rng.uniform(0, tmpl.leaf_max_tilt_deg * kDeg),
                          tilt_axis) *
        (-ray);
    const Vec3 x_axis = random_unit_perpendicular(normal, rng);
    Mat3 r;
    r.col(0) = x_axis;
    r.col(1) = normal.cross(x_axis);
    r.col(2) = normal;
    Occluder leaf;
    leaf.pose = cam.pose * make_pose(r, center);
    leaf.semi_major = rng.uniform(tmpl.leaf_semi_major.lo, tmpl.leaf_semi_major.hi);
    leaf.semi_minor = std::min(
        leaf.semi_major,
        rng.uniform(tmpl.leaf_semi_minor.lo, tmpl.leaf_semi_minor.hi));
    scene.occluders.push_back(leaf);
  }
  return scene;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Rasterises one posed mesh into a z-buffer by intersecting each pixel ray
// that falls inside a triangle's projected bounding box.
void cast_mesh(const TriangleMesh &mesh, const Pose &to_camera,
               const CameraSetup &cam, std::vector<double> &zbuf) {
  const Eigen::Matrix3Xd v = to_camera * mesh.vertices;
  const auto &k = cam.intrinsics;
  for (const auto &f : mesh.faces) {
    const Vec3 a = v.col(f[0]), b = v.col(f[1]), c = v.col(f[2]);
    if (a.z() <= 1e-4 || b.z() <= 1e-4 || c.z() <= 1e-4)
      continue;
    const auto pa = k.project(a), pb = k.project(b), pc = k.project(c);
    const int u0 = std::max(0, static_cast<int>(std::ceil(std::min({pa.x(), pb.x(), pc.x()}))));
    const int u1 = std::min(cam.width - 1, static_cast<int>(std::floor(std::max({pa.x(), pb.x(), pc.x()}))));
    const int v0 = std::max(0, static_cast<int>(std::ceil(std::min({pa.y(), pb.y(), pc.y()}))));
    const int v1 = std::min(cam.height - 1, static_cast<int>(std::floor(std::max({pa.y(), pb.y(), pc.y()}))));
    if (u0 > u1 || v0 > v1)
      continue;
    const Vec3 e1 = b - a, e2 = c - a;
    for (int pv = v0; pv <= v1; ++pv) {
      for (int pu = u0; pu <= u1; ++pu) {
        const Vec3 d = k.ray(pu, pv);
        const Vec3 p = d.cross(e2);
        const double det = e1.dot(p);
        if (std::abs(det) < 1e-18)
          continue;
        const double inv = 1.0 / det;
        const Vec3 s = -a;
        const double bu = s.dot(p) * inv;
        if (bu < -1e-12 || bu > 1 + 1e-12)
          continue;
        const Vec3 q = s.cross(e1);
        const double bv = d.dot(q) * inv;
        if (bv < -1e-12 || bu + bv > 1 + 1e-12)
          continue;
        const double t = e2.dot(q) * inv; // equals depth since d.z == 1
        auto &z = zbuf[static_cast<std::size_t>(pv) * cam.width + pu];
        if (t > 0 && t < z)
          z = t;
      }
    }
  }
}

void cast_ellipse(const Occluder &leaf, const Pose &to_camera,
                  const CameraSetup &cam, std::vector<double> &zbuf) {
  const Pose pose = to_camera * leaf.pose;
  const Vec3 c = pose.translation();
  const Vec3 ax = pose.linear().col(0), ay = pose.linear().col(1),
             n = pose.linear().col(2);
  // Projected bounding box from boundary samples.
  double umin = kInf, umax = -kInf, vmin = kInf, vmax = -kInf;
  for (int i = 0; i < 64; ++i) {
    const double th = 2 * std::numbers::pi * i / 64;
    const Vec3 p = c + leaf.semi_major * std::cos(th) * ax +
                   leaf.semi_minor * std::sin(th) * ay;
    if (p.z() <= 1e-4)
      return; // leaf crosses the image plane; not supported
    const auto uv = cam.intrinsics.project(p);
    umin = std::min(umin, uv.x());
    umax = std::max(umax, uv.x());
    vmin = std::min(vmin, uv.y());
    vmax = std::max(vmax, uv.y());
  }
  const int u0 = std::max(0, static_cast<int>(std::floor(umin)) - 1);
  const int u1 = std::min(cam.width - 1, static_cast<int>(std::ceil(umax)) + 1);
  const int v0 = std::max(0, static_cast<int>(std::floor(vmin)) - 1);
  const int v1 = std::min(cam.height - 1, static_cast<int>(std::ceil(vmax)) + 1);
  for (int pv = v0; pv <= v1; ++pv) {
    for (int pu = u0; pu <= u1; ++pu) {
      const Vec3 d = cam.intrinsics.ray(pu, pv);
      const double denom = n.dot(d);
      if (std::abs(denom) < 1e-12)
        continue;
      const double t = n.dot(c) / denom;
      if (t <= 0)
        continue;
      const Vec3 local = t * d - c;
      const double x = local.dot(ax) / leaf.semi_major;
      const double y = local.dot(ay) / leaf.semi_minor;
      if (x * x + y * y > 1)
        continue;
      auto &z = zbuf[static_cast<std::size_t>(pv) * cam.width + pu];
      if (t < z)
        z = t;
    }
  }
}

std::uint16_t to_mm(double z_m) {
  const double mm = std::round(z_m * 1000.0);
  return static_cast<std::uint16_t>(std::clamp(mm, 1.0, 65535.0));
}

} // namespace

RenderedScene render_rgbd(const SceneConfig &scene,
                          const StrawberryPrior &prior) {
  const auto &cam = scene.camera;
  if (scene.berries.empty())
    throw ParameterError("scene has no berries");
  if (cam.width <= 0 || cam.height <= 0)
    throw ParameterError("camera dimensions must be positive");
  validate(cam.intrinsics, cam.width, cam.height);

  const auto n_pix = static_cast<std::size_t>(cam.width) * cam.height;
  const Pose world_to_cam = cam.pose.inverse();
  const std::size_t n_berries = scene.berries.size();

  std::vector<std::vector<double>> solo(n_berries,
                                        std::vector<double>(n_pix, kInf));
  for (std::size_t b = 0; b < n_berries; ++b)
    cast_mesh(prior.mesh(), world_to_cam * scene.berries[b].pose, cam, solo[b]);
  std::vector<double> leaf_z(n_pix, kInf);
  for (const auto &leaf : scene.occluders)
    cast_ellipse(leaf, world_to_cam, cam, leaf_z);

  // owner: -1 background, -2 leaf, otherwise berry index.
  std::vector<int> owner(n_pix, -1);
  std::vector<double> zbuf = leaf_z;
  for (std::size_t i = 0; i < n_pix; ++i)
    if (leaf_z[i] < kInf)
      owner[i] = -2;
  for (std::size_t b = 0; b < n_berries; ++b)
    for (std::size_t i = 0; i < n_pix; ++i)
      if (solo[b][i] < zbuf[i]) {
        zbuf[i] = solo[b][i];
        owner[i] = static_cast<int>(b);
      }

  RenderedScene out;
  out.rgb = RgbImage(cam.width, cam.height);
  out.truth.clean_depth = DepthImage(cam.width, cam.height);
  for (std::size_t i = 0; i < n_pix; ++i) {
    if (owner[i] == -1)
      continue;
    out.truth.clean_depth.values[i] = to_mm(zbuf[i]);
    Rgb color = kLeafColor;
    if (owner[i] >= 0)
      color = scene.berries[static_cast<std::size_t>(owner[i])].ripeness ==
                      Ripeness::ripe
                  ? kRipeColor
                  : kUnripeColor;
    const int u = static_cast<int>(i % cam.width);
    const int v = static_cast<int>(i / cam.width);
    out.rgb.set(u, v, color);
  }

  // Sensor noise: Bernoulli dropout then additive Gaussian on the
  // unquantised depth, each drawn per pixel from its own counter.
  const CounterRng root(scene.rng_seed);
  const CounterRng dropout = root.split(kDropoutStream);
  const CounterRng noise = root.split(kDepthNoiseStream);
  out.depth = DepthImage(cam.width, cam.height);
  for (std::size_t i = 0; i < n_pix; ++i) {
    if (owner[i] == -1)
      continue;
    if (dropout.uniform(i) < scene.noise.dropout_rate)
      continue;
    double z_mm = zbuf[i] * 1000.0;
    if (scene.noise.depth_sigma_mm > 0)
      z_mm += scene.noise.depth_sigma_mm * noise.normal(i);
    out.depth.values[i] = to_mm(z_mm / 1000.0);
  }

  const CounterRng truth_rng = root.split(kTruthStream);
  for (std::size_t b = 0; b < n_berries; ++b) {
    const auto &berry = scene.berries[b];
    InstanceTruth t;
    t.instance_id = berry.instance_id;
    t.ripeness = berry.ripeness;
    t.pose = world_to_cam * berry.pose;
    t.center = t.pose.translation();
    t.clouds = sample_ground_truth(
        prior, t.pose, prior.densities(),
        truth_rng.split(static_cast<std::uint64_t>(berry.instance_id)));
    t.mask = InstanceMask(cam.width, cam.height, berry.instance_id,
                          berry.ripeness);
    for (std::size_t i = 0; i < n_pix; ++i) {
      if (solo[b][i] < kInf)
        ++t.unoccluded_pixels;
      if (owner[i] == static_cast<int>(b)) {
        t.mask.bits[i] = 1;
        ++t.visible_pixels;
      }
    }
    t.visibility = t.unoccluded_pixels
                       ? static_cast<double>(t.visible_pixels) /
                             static_cast<double>(t.unoccluded_pixels)
                       : 0.0;
    out.truth.instances.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------- JSON

using nlohmann::json;

json pose_to_json(const Pose &pose) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      rot.push_back(pose.linear()(r, c));
  const Vec3 t = pose.translation();
  return {{"rotation", rot}, {"translation", {t.x(), t.y(), t.z()}}};
}

Pose pose_from_json(const json &j) {
  detail::check_keys(j, {"rotation", "translation"}, "pose");
  const auto rot = detail::read_req<std::vector<double>>(j, "rotation", "pose");
  const auto tr = detail::read_req<std::vector<double>>(j, "translation", "pose");
  if (rot.size() != 9 || tr.size() != 3)
    throw InputError("pose: rotation needs 9 values and translation 3");
  Mat3 r;
  for (int i = 0; i < 9; ++i)
    r(i / 3, i % 3) = rot[static_cast<std::size_t>(i)];
  if ((r.transpose() * r - Mat3::Identity()).norm() > 1e-6 ||
      r.determinant() < 0)
    throw InputError("pose: rotation is not a proper rotation matrix");
  return make_pose(r, Vec3(tr[0], tr[1], tr[2]));
}

namespace {

json camera_to_json(const CameraSetup &c) {
  return {{"fx", c.intrinsics.fx}, {"fy", c.intrinsics.fy},
          {"cx", c.intrinsics.cx}, {"cy", c.intrinsics.cy},
          {"width", c.width},      {"height", c.height},
          {"pose", pose_to_json(c.pose)}};
}

CameraSetup camera_from_json(const json &j) {
  detail::check_keys(j, {"fx", "fy", "cx", "cy", "width", "height", "pose"},
                     "camera");
  CameraSetup c;
  detail::read_opt(j, "fx", c.intrinsics.fx, "camera");
  detail::read_opt(j, "fy", c.intrinsics.fy, "camera");
  detail::read_opt(j, "cx", c.intrinsics.cx, "camera");
  detail::read_opt(j, "cy", c.intrinsics.cy, "camera");
  detail::read_opt(j, "width", c.width, "camera");
  detail::read_opt(j, "height", c.height, "camera");
  if (j.contains("pose"))
    c.pose = pose_from_json(j["pose"]);
  return c;
}

json noise_to_json(const NoiseParams &n) {
  return {{"depth_sigma_mm", n.depth_sigma_mm}, {"dropout_rate", n.dropout_rate}};
}

NoiseParams noise_from_json(const json &j) {
  detail::check_keys(j, {"depth_sigma_mm", "dropout_rate"}, "noise");
  NoiseParams n;
  detail::read_opt(j, "depth_sigma_mm", n.depth_sigma_mm, "noise");
  detail::read_opt(j, "dropout_rate", n.dropout_rate, "noise");
  if (n.depth_sigma_mm < 0 || n.dropout_rate < 0 || n.dropout_rate > 1)
    throw InputError("noise: sigma must be >= 0 and dropout in [0, 1]");
  return n;
}

json range_to_json(const Range &r) { return json::array({r.lo, r.hi}); }

void read_range(const json &j, const char *key, Range &r) {
  if (!j.contains(key))
    return;
  const auto v = detail::read_req<std::vector<double>>(j, key, "template");
  if (v.size() != 2 || v[0] > v[1])
    throw InputError(std::string("template.") + key + ": expected [lo, hi]");
  r = {v[0], v[1]};
}

} // namespace

json to_json(const SceneConfig &scene) {
  json berries = json::array();
  for (const auto &b : scene.berries)
    berries.push_back({{"instance_id", b.instance_id},
                       {"ripeness", std::string(to_string(b.ripeness))},
                       {"pose", pose_to_json(b.pose)}});
  json leaves = json::array();
  for (const auto &o : scene.occluders)
    leaves.push_back({{"pose", pose_to_json(o.pose)},
                      {"semi_major", o.semi_major},
                      {"semi_minor", o.semi_minor}});
  return {{"seed", scene.rng_seed},
          {"camera", camera_to_json(scene.camera)},
          {"noise", noise_to_json(scene.noise)},
          {"berries", berries},
          {"occluders", leaves}};
}

SceneConfig scene_from_json(const json &j) {
  detail::check_keys(j, {"seed", "camera", "noise", "berries", "occluders"},
                     "scene");
  SceneConfig s;
  s.rng_seed = detail::read_req<std::uint64_t>(j, "seed", "scene");
  s.camera = camera_from_json(j.at("camera"));
  if (j.contains("noise"))
    s.noise = noise_from_json(j["noise"]);
  for (const auto &b : j.at("berries")) {
    detail::check_keys(b, {"instance_id", "ripeness", "pose"}, "berry");
    BerryInstance inst;
    inst.instance_id = detail::read_req<int>(b, "instance_id", "berry");
    inst.ripeness =
        ripeness_from_string(detail::read_req<std::string>(b, "ripeness", "berry"));
    inst.pose = pose_from_json(b.at("pose"));
    s.berries.push_back(inst);
  }
  if (s.berries.empty())
    throw InputError("scene: at least one berry required");
  if (j.contains("occluders"))
    for (const auto &o : j["occluders"]) {
      detail::check_keys(o, {"pose", "semi_major", "semi_minor"}, "occluder");
      Occluder leaf;
      leaf.pose = pose_from_json(o.at("pose"));
      leaf.semi_major = detail::read_req<double>(o, "semi_major", "occluder");
      leaf.semi_minor = detail::read_req<double>(o, "semi_minor", "occluder");
      if (!(leaf.semi_major > 0 && leaf.semi_minor > 0))
        throw InputError("occluder: semi-axes must be positive");
      s.occluders.push_back(leaf);
    }
  return s;
}

json to_json(const SceneTemplate &t) {
  return {{"n_berries", t.n_berries},
          {"n_leaves_min", t.n_leaves_min},
          {"n_leaves_max", t.n_leaves_max},
          {"clutter_spacing", t.clutter_spacing},
          {"ripe_fraction", t.ripe_fraction},
          {"min_ripe", t.min_ripe},
          {"region_x", range_to_json(t.region_x)},
          {"region_y", range_to_json(t.region_y)},
          {"region_z", range_to_json(t.region_z)},
          {"max_tilt_deg", t.max_tilt_deg},
          {"leaf_semi_major", range_to_json(t.leaf_semi_major)},
          {"leaf_semi_minor", range_to_json(t.leaf_semi_minor)},
          {"leaf_gap", range_to_json(t.leaf_gap)},
          {"leaf_lateral", t.leaf_lateral},
          {"leaf_max_tilt_deg", t.leaf_max_tilt_deg},
          {"camera", camera_to_json(t.camera)},
          {"noise", noise_to_json(t.noise)},
          {"max_attempts", t.max_attempts}};
}

SceneTemplate template_from_json(const json &j) {
  detail::check_keys(j,
                     {"n_berries", "n_leaves_min", "n_leaves_max",
                      "clutter_spacing", "ripe_fraction", "min_ripe",
                      "region_x", "region_y", "region_z", "max_tilt_deg",
                      "leaf_semi_major", "leaf_semi_minor", "leaf_gap",
                      "leaf_lateral", "leaf_max_tilt_deg", "camera", "noise",
                      "max_attempts"},
                     "template");
  SceneTemplate t;
  const char *w = "template";
  detail::read_opt(j, "n_berries", t.n_berries, w);
  detail::read_opt(j, "n_leaves_min", t.n_leaves_min, w);
  detail::read_opt(j, "n_leaves_max", t.n_leaves_max, w);
  if (j.contains("n_leaves_min") && !j.contains("n_leaves_max"))
    t.n_leaves_max = std::max(t.n_leaves_max, t.n_leaves_min);
  detail::read_opt(j, "clutter_spacing", t.clutter_spacing, w);
  detail::read_opt(j, "ripe_fraction", t.ripe_fraction, w);
  detail::read_opt(j, "min_ripe", t.min_ripe, w);
  read_range(j, "region_x", t.region_x);
  read_range(j, "region_y", t.region_y);
  read_range(j, "region_z", t.region_z);
  detail::read_opt(j, "max_tilt_deg", t.max_tilt_deg, w);
  read_range(j, "leaf_semi_major", t.leaf_semi_major);
  read_range(j, "leaf_semi_minor", t.leaf_semi_minor);
  read_range(j, "leaf_gap", t.leaf_gap);
  detail::read_opt(j, "leaf_lateral", t.leaf_lateral, w);
  detail::read_opt(j, "leaf_max_tilt_deg", t.leaf_max_tilt_deg, w);
  if (j.contains("camera"))
    t.camera = camera_from_json(j["camera"]);
  if (j.contains("noise"))
    t.noise = noise_from_json(j["noise"]);
  detail::read_opt(j, "max_attempts", t.max_attempts, w);
  return t;
}

} // namespace berrypick
