#include "berrypick/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "berrypick/chamfer.hpp"
#include "berrypick/errors.hpp"
#include "berrypick/filters.hpp"
#include "berrypick/io.hpp"
#include "berrypick/rng.hpp"
#include "json_util.hpp"

namespace berrypick {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(FailureReason r) {
  switch (r) {
  case FailureReason::no_ripe:
    return "no_ripe";
  case FailureReason::registration_failure:
    return "registration_failure";
  case FailureReason::infeasible_path:
    return "infeasible_path";
  case FailureReason::missed_grasp:
    return "missed_grasp";
  }
  return "unknown";
}

std::optional<double> TrialResult::cd_mm_mean() const {
  if (cd_mm.empty())
    return std::nullopt;
  double s = 0;
  for (const auto &c : cd_mm)
    s += c.cd_mm;
  return s / static_cast<double>(cd_mm.size());
}

// ---------------------------------------------------------------- artifacts

SceneArtifacts make_artifacts(const SceneConfig &scene,
                              const RenderedScene &rendered, int scene_id) {
  SceneArtifacts a;
  a.scene_id = scene_id;
  a.intrinsics = scene.camera.intrinsics;
  a.rgb = rendered.rgb;
  a.depth = rendered.depth;
  a.truth = rendered.truth;
  for (const auto &t : rendered.truth.instances)
    if (t.visible_pixels > 0)
      a.masks.push_back(t.mask);
  return a;
}

namespace {

std::string mask_name(int id) { return "mask_" + std::to_string(id) + ".pgm"; }
std::string truth_name(int id, int level) {
  return "gt_" + std::to_string(id) + "_s" + std::to_string(level) + ".ply";
}

void make_dir(const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw IoError(dir.string(), ec.message());
}

json parse_json(const fs::path &path) {
  try {
    return json::parse(io::read_text(path));
  } catch (const json::exception &e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

} // namespace

void save_scene_dir(const fs::path &dir, const SceneConfig &scene,
                    const RenderedScene &rendered) {
  make_dir(dir / "masks");
  make_dir(dir / "truth");
  io::write_text(dir / "scene.json", to_json(scene).dump(2) + "\n");
  io::write_ppm(dir / "rgb.ppm", rendered.rgb);
  io::write_depth_pgm(dir / "depth.pgm", rendered.depth);
  io::write_depth_pgm(dir / "depth_clean.pgm", rendered.truth.clean_depth);
  json truth = json::array();
  for (const auto &t : rendered.truth.instances) {
    if (t.visible_pixels > 0)
      io::write_mask(dir / "masks" / mask_name(t.instance_id), t.mask);
    for (int l = 0; l < 3; ++l)
      io::write_ply(dir / "truth" / truth_name(t.instance_id, l), t.clouds[l]);
    truth.push_back({{"instance_id", t.instance_id},
                     {"ripeness", to_string(t.ripeness)},
                     {"pose", pose_to_json(t.pose)},
                     {"visible_pixels", t.visible_pixels},
                     {"unoccluded_pixels", t.unoccluded_pixels},
                     {"visibility", t.visibility}});
  }
  io::write_text(dir / "truth.json", json{{"instances", truth}}.dump(2) + "\n");
}

SceneArtifacts load_scene_dir(const fs::path &dir) {
  if (!fs::is_directory(dir))
    throw InputError(dir.string() + ": not a scene directory");
  const SceneConfig scene = scene_from_json(parse_json(dir / "scene.json"));
  SceneArtifacts a;
  a.intrinsics = scene.camera.intrinsics;
  a.rgb = io::read_ppm(dir / "rgb.ppm");
  a.depth = io::read_depth_pgm(dir / "depth.pgm");
  if (fs::exists(dir / "depth_clean.pgm"))
    a.truth.clean_depth = io::read_depth_pgm(dir / "depth_clean.pgm");

  const json truth = parse_json(dir / "truth.json");
  detail::check_keys(truth, {"instances"}, "truth.json");
  if (!truth.contains("instances") || !truth["instances"].is_array())
    throw InputError("truth.json: missing instances array");
  for (const auto &j : truth["instances"]) {
    detail::check_keys(j,
                       {"instance_id", "ripeness", "pose", "visible_pixels",
                        "unoccluded_pixels", "visibility"},
                       "truth.json instance");
    InstanceTruth t;
    t.instance_id = detail::read_req<int>(j, "instance_id", "truth.json");
    t.ripeness = ripeness_from_string(
        detail::read_req<std::string>(j, "ripeness", "truth.json"));
    if (!j.contains("pose"))
      throw InputError("truth.json: missing pose");
    t.pose = pose_from_json(j["pose"]);
    t.center = t.pose.translation();
    detail::read_opt(j, "visible_pixels", t.visible_pixels, "truth.json");
    detail::read_opt(j, "unoccluded_pixels", t.unoccluded_pixels, "truth.json");
    detail::read_opt(j, "visibility", t.visibility, "truth.json");
    for (int l = 0; l < 3; ++l)
      t.clouds[l] = io::read_ply(dir / "truth" / truth_name(t.instance_id, l));
    const fs::path mp = dir / "masks" / mask_name(t.instance_id);
    if (fs::exists(mp)) {
      t.mask = io::read_mask(mp);
      a.masks.push_back(t.mask);
    } else {
      t.mask = InstanceMask(a.depth.width, a.depth.height, t.instance_id,
                            t.ripeness);
    }
    a.truth.instances.push_back(std::move(t));
  }
  return a;
}

// ---------------------------------------------------------------- pipeline

namespace {

void check_artifacts(const SceneArtifacts &s) {
  if (s.depth.width <= 0 || s.depth.height <= 0)
    throw InputError("scene has no depth image");
  if (s.rgb.width != s.depth.width || s.rgb.height != s.depth.height)
    throw InputError("rgb and depth sizes differ");
  try {
    validate(s.intrinsics, s.depth.width, s.depth.height);
  } catch (const ParameterError &e) {
    throw InputError(e.what());
  }
  for (const auto &m : s.masks) {
    if (m.width != s.depth.width || m.height != s.depth.height)
      throw InputError("mask " + std::to_string(m.instance_id) +
                       " does not match the depth image size");
    const bool known = std::any_of(
        s.truth.instances.begin(), s.truth.instances.end(),
        [&](const InstanceTruth &t) { return t.instance_id == m.instance_id; });
    if (!known)
      throw InputError("mask " + std::to_string(m.instance_id) +
                       " has no ground truth");
  }
}

const InstanceTruth *find_truth(const GroundTruth &g, int id) {
  for (const auto &t : g.instances)
    if (t.instance_id == id)
      return &t;
  return nullptr;
}

} // namespace

PipelineOutput run_pipeline_detailed(const SceneArtifacts &scene,
                                     const PipelineConfig &cfg,
                                     const ShapeCompleter &completer) {
  try {
    validate(cfg);
  } catch (const ParameterError &e) {
    throw InputError(std::string("config: ") + e.what());
  }
  check_artifacts(scene);

  PipelineOutput out;
  TrialResult &trial = out.trial;
  trial.scene_id = scene.scene_id;

  std::vector<const InstanceMask *> detections;
  for (const auto &m : scene.masks)
    if (m.count() > 0)
      detections.push_back(&m);
  trial.detections = static_cast<int>(detections.size());

  const bool any_ripe = std::any_of(
      detections.begin(), detections.end(),
      [](const InstanceMask *m) { return m->ripeness == Ripeness::ripe; });
  if (!any_ripe) {
    trial.failure_reason = FailureReason::no_ripe;
    return out;
  }

  const DepthImage filtered = median_filter(scene.depth, cfg.median_window);
  const PointCloud cloud = voxel_downsample(
      project_point_cloud(scene.rgb, filtered, scene.intrinsics), cfg.voxel);

  // Ripe instances whose cloud could not be recovered stay out of the
  // candidate list but still count as obstacles when anything is left.
  std::vector<PlanningInstance> candidates_and_obstacles;
  std::vector<bool> candidate;
  for (const InstanceMask *m : detections) {
    PlanningInstance inst;
    inst.instance_id = m->instance_id;
    inst.ripeness = m->ripeness;
    const PointCloud partial = remove_outliers(extract_masked(cloud, *m), cfg.outlier);
    bool usable = !partial.empty();
    if (cfg.use_completion && usable) {
      try {
        const CompletionResult c = completer.complete(partial);
        inst.cloud = c.levels[2];
        if (const auto *t = find_truth(scene.truth, inst.instance_id))
          trial.cd_mm.push_back(
              {inst.instance_id, chamfer_metric_mm(c.levels[2], t->clouds[2])});
      } catch (const RegistrationError &) {
        inst.cloud = partial;
        usable = false;
      } catch (const InsufficientDataError &) {
        inst.cloud = partial;
        usable = false;
      }
    } else {
      inst.cloud = partial;
    }
    candidates_and_obstacles.push_back(std::move(inst));
    candidate.push_back(usable);
  }
  out.instances = candidates_and_obstacles;

  std::vector<PlanningInstance> pool;
  for (std::size_t i = 0; i < out.instances.size(); ++i) {
    PlanningInstance p = out.instances[i];
    if (!candidate[i] && p.ripeness == Ripeness::ripe)
      p.ripeness = Ripeness::unripe; // keep as obstacle, never as target
    pool.push_back(std::move(p));
  }

  std::size_t k = 0;
  try {
    k = select_target(pool, cfg.p_ee);
  } catch (const NoTargetError &) {
    trial.failure_reason = FailureReason::registration_failure;
    return out;
  }
  trial.target_id = pool[k].instance_id;

  ObstacleSet obstacles;
  if (cfg.use_obstacles)
    obstacles = build_obstacles(pool, k);

  GraspPose grasp;
  try {
    grasp = estimate_grasp(pool[k].cloud, cfg.p_ee, completer.prior().width());
  } catch (const GeometryError &) {
    trial.failure_reason = FailureReason::infeasible_path;
    return out;
  }
  out.grasp = grasp;

  const Vec3 keypoints[] = {cfg.p_ee, grasp.pregrasp(), grasp.grasp_point};
  const OccupancyGrid grid =
      build_occupancy(obstacles, cfg.grid_resolution, cfg.inflation, keypoints);
  out.occupied_cells = grid.occupied_count();

  RobotState state;
  state.p_ee = cfg.p_ee;
  state.gripper_radius = cfg.gripper_radius;
  out.trajectory = plan_trajectory(grasp, grid, state);
  if (!out.trajectory.feasible) {
    trial.failure_reason = FailureReason::infeasible_path;
    return out;
  }
  trial.trajectory_verified = verify_collision_free(out.trajectory, grid);

  const ExecutionOutcome exec =
      simulate_execution(out.trajectory, scene.truth.instances, *trial.target_id,
                         cfg.gripper_radius, cfg.grasp_tolerance);
  trial.attempted = true;
  trial.success = exec.success;
  trial.hit_ids = exec.hits;
  if (!exec.success)
    trial.failure_reason = FailureReason::missed_grasp;
  return out;
}

TrialResult run_pipeline(const SceneArtifacts &scene, const PipelineConfig &cfg) {
  const PriorRegistrationCompleter completer(StrawberryPrior::builtin(), cfg.icp,
                                             cfg.rng_seed);
  return run_pipeline_detailed(scene, cfg, completer).trial;
}

// ---------------------------------------------------------------- benchmark

std::uint64_t benchmark_scene_seed(std::uint64_t seed, int index) {
  return CounterRng(seed, 0x5ce7e).bits(static_cast<std::uint64_t>(index));
}

namespace {

TrialResult run_benchmark_scene(const SceneTemplate &tmpl,
                                const PipelineConfig &cfg, std::uint64_t seed,
                                int index) {
  // A layout that cannot be placed is redrawn under a derived seed.
  constexpr int kRedraws = 16;
  for (int r = 0; r < kRedraws; ++r) {
    const std::uint64_t s =
        r == 0 ? benchmark_scene_seed(seed, index)
               : CounterRng(benchmark_scene_seed(seed, index), 0x4ed7a).bits(r);
    SceneConfig scene;
    try {
      scene = generate_scene(tmpl, s);
    } catch (const GenerationError &) {
      continue;
    }
    const RenderedScene rendered = render_rgbd(scene);
    return run_pipeline(make_artifacts(scene, rendered, index), cfg);
  }
  throw InputError("scene template cannot be placed (scene " +
                   std::to_string(index) + ")");
}

} // namespace

std::vector<TrialResult> run_benchmark(const SceneTemplate &tmpl, int n_scenes,
                                       const PipelineConfig &cfg,
                                       std::uint64_t seed, int threads) {
  if (n_scenes < 1)
    throw ParameterError("run_benchmark: n_scenes must be >= 1");
  try {
    validate(cfg);
  } catch (const ParameterError &e) {
    throw InputError(std::string("config: ") + e.what());
  }
  std::vector<TrialResult> results(static_cast<std::size_t>(n_scenes));
  std::vector<std::exception_ptr> errors(results.size());
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n_scenes; i = next++) {
      try {
        results[static_cast<std::size_t>(i)] = run_benchmark_scene(tmpl, cfg, seed, i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  const int n_threads = std::clamp(threads, 1, n_scenes);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t)
      pool.emplace_back(worker);
  }
  for (const auto &e : errors)
    if (e)
      std::rethrow_exception(e);
  return results;
}

// ---------------------------------------------------------------- metrics

MetricsReport compute_metrics(const std::vector<TrialResult> &results) {
  if (results.empty())
    throw ParameterError("compute_metrics: no trials");
  MetricsReport r;
  std::vector<double> cds;
  for (const auto &t : results) {
    ++r.trials;
    r.detections += t.detections;
    r.attempts += t.attempted ? 1 : 0;
    r.successes += t.success ? 1 : 0;
    if (t.attempted && !t.hit_ids.empty())
      ++r.hit_trials;
    r.berries_hit += static_cast<int>(t.hit_ids.size());
    for (const auto &c : t.cd_mm)
      cds.push_back(c.cd_mm);
  }
  const auto pct = [](int num, int den) {
    return den > 0 ? 100.0 * num / den : 0.0;
  };
  r.rho_a = pct(r.attempts, r.detections);
  r.rho_s = pct(r.successes, r.detections);
  r.rho_s_over_a = pct(r.successes, r.attempts);
  r.rho_h = pct(r.hit_trials, r.attempts);
  if (cds.empty()) {
    r.cd_mean = r.cd_median = std::numeric_limits<double>::quiet_NaN();
  } else {
    double s = 0;
    for (double c : cds)
      s += c;
    r.cd_mean = s / static_cast<double>(cds.size());
    std::sort(cds.begin(), cds.end());
    const std::size_t n = cds.size();
    r.cd_median = n % 2 ? cds[n / 2] : 0.5 * (cds[n / 2 - 1] + cds[n / 2]);
  }
  return r;
}

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json &j, const char *key) {
  if (!j.contains(key))
    throw InputError(std::string("metrics: missing key '") + key + "'");
  const auto &v = j.at(key);
  if (v.is_null())
    return std::numeric_limits<double>::quiet_NaN();
  if (!v.is_number())
    throw InputError(std::string("metrics.") + key + ": expected a number");
  return v.get<double>();
}

std::string fmt(double v) {
  if (!std::isfinite(v))
    return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

} // namespace

json to_json(const MetricsReport &r) {
  return {{"rho_a", number_or_null(r.rho_a)},
          {"rho_s", number_or_null(r.rho_s)},
          {"rho_s_over_a", number_or_null(r.rho_s_over_a)},
          {"rho_h", number_or_null(r.rho_h)},
          {"cd_mean", number_or_null(r.cd_mean)},
          {"cd_median", number_or_null(r.cd_median)},
          {"trials", r.trials},
          {"detections", r.detections},
          {"attempts", r.attempts},
          {"successes", r.successes},
          {"hit_trials", r.hit_trials},
          {"berries_hit", r.berries_hit}};
}

MetricsReport metrics_from_json(const json &j) {
  detail::check_keys(j,
                     {"rho_a", "rho_s", "rho_s_over_a", "rho_h", "cd_mean",
                      "cd_median", "trials", "detections", "attempts",
                      "successes", "hit_trials", "berries_hit"},
                     "metrics");
  MetricsReport r;
  r.rho_a = number_from(j, "rho_a");
  r.rho_s = number_from(j, "rho_s");
  r.rho_s_over_a = number_from(j, "rho_s_over_a");
  r.rho_h = number_from(j, "rho_h");
  r.cd_mean = number_from(j, "cd_mean");
  r.cd_median = number_from(j, "cd_median");
  r.trials = detail::read_req<int>(j, "trials", "metrics");
  r.detections = detail::read_req<int>(j, "detections", "metrics");
  r.attempts = detail::read_req<int>(j, "attempts", "metrics");
  r.successes = detail::read_req<int>(j, "successes", "metrics");
  r.hit_trials = detail::read_req<int>(j, "hit_trials", "metrics");
  r.berries_hit = detail::read_req<int>(j, "berries_hit", "metrics");
  return r;
}

std::string trials_csv(const std::vector<TrialResult> &results) {
  std::ostringstream os;
  os << "scene_id,detections,attempted,success,n_hits,failure_reason,cd_mm_mean\n";
  for (const auto &t : results) {
    os << t.scene_id << ',' << t.detections << ',' << (t.attempted ? 1 : 0)
       << ',' << (t.success ? 1 : 0) << ',' << t.hit_ids.size() << ','
       << (t.failure_reason ? to_string(*t.failure_reason) : "") << ','
       << (t.cd_mm_mean() ? fmt(*t.cd_mm_mean()) : "") << '\n';
  }
  return os.str();
}

std::string comparison_csv(const MetricsReport &baseline,
                           const MetricsReport &variant) {
  std::ostringstream os;
  os << "metric,baseline,variant,delta\n";
  const auto row = [&](const char *name, double b, double v) {
    os << name << ',' << fmt(b) << ',' << fmt(v) << ',' << fmt(v - b) << '\n';
  };
  row("rho_a", baseline.rho_a, variant.rho_a);
  row("rho_s", baseline.rho_s, variant.rho_s);
  row("rho_s_over_a", baseline.rho_s_over_a, variant.rho_s_over_a);
  row("rho_h", baseline.rho_h, variant.rho_h);
  row("cd_mean", baseline.cd_mean, variant.cd_mean);
  row("cd_median", baseline.cd_median, variant.cd_median);
  return os.str();
}

void emit_report(const MetricsReport &report,
                 const std::vector<TrialResult> &results, const fs::path &dir,
                 const std::optional<MetricsReport> &baseline) {
  make_dir(dir);
  io::write_text(dir / "metrics.json", to_json(report).dump(2) + "\n");
  io::write_text(dir / "trials.csv", trials_csv(results));
  if (baseline)
    io::write_text(dir / "comparison.csv", comparison_csv(*baseline, report));
}

} // namespace berrypick
