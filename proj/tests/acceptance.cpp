// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "berrypick/chamfer.hpp"
#include "berrypick/errors.hpp"
#include "berrypick/filters.hpp"
#include "berrypick/pipeline.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "synth.hpp"

using namespace berrypick;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string &name, const std::function<Outcome()> &check) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception &e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  failures += o.pass ? 0 : 1;
  std::printf("%s [%d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(),
              o.detail.c_str(), seconds_since(t0));
  std::fflush(stdout);
}

std::string fmt(const char *f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

SceneTemplate cluttered() {
  SceneTemplate t;
  t.n_berries = 5;
  t.n_leaves_min = 2;
  t.n_leaves_max = 3;
  return t;
}

// ---------------------------------------------------------------- 1
Outcome completion_accuracy() {
  const auto t0 = Clock::now();
  const PipelineConfig cfg;
  const auto &prior = *StrawberryPrior::builtin();
  SceneTemplate tmpl = cluttered();
  tmpl.n_leaves_min = 0;
  std::vector<double> cds;
  int failed = 0;
  for (int i = 0; cds.size() + failed < 100; ++i) {
    SceneConfig scene;
    try {
      scene = generate_scene(tmpl, benchmark_scene_seed(1001, i));
    } catch (const GenerationError &) {
      continue;
    }
    const auto r = render_rgbd(scene);
    const auto cloud = voxel_downsample(
        project_point_cloud(r.rgb, median_filter(r.depth, cfg.median_window),
                            scene.camera.intrinsics),
        cfg.voxel);
    for (const auto &t : r.truth.instances) {
      if (t.visibility < 0.4 || cds.size() + failed >= 100)
        continue;
      const auto partial = remove_outliers(extract_masked(cloud, t.mask), cfg.outlier);
      try {
        const auto c = complete_cloud(partial, prior, cfg.icp, cfg.rng_seed);
        cds.push_back(chamfer_metric_mm(c.levels[2], t.clouds[2]));
      } catch (const std::runtime_error &) {
        ++failed; // counts as unbounded error
      }
    }
  }
  const double secs = seconds_since(t0);
  std::vector<double> all = cds;
  all.insert(all.end(), failed, std::numeric_limits<double>::infinity());
  std::sort(all.begin(), all.end());
  const double median = 0.5 * (all[49] + all[50]);
  double mean = 0;
  for (double c : all)
    mean += c;
  mean /= 100;
  const bool pass = median <= 2.0 && mean <= 3.0 && secs <= 60.0;
  return {pass, fmt("100 berries with visibility >= 40%%, median CD %.3f mm (<= 2.0), "
                    "mean %.3f mm (<= 3.0), failures %.0f, %.1f s (<= 60)",
                    median, mean, failed, secs)};
}

// ---------------------------------------------------------------- 2
Outcome ablations() {
  const auto t0 = Clock::now();
  const PipelineConfig full;
  PipelineConfig no_obstacles, no_completion;
  no_obstacles.use_obstacles = false;
  no_completion.use_completion = false;
  const auto tmpl = cluttered();
  const auto a = compute_metrics(run_benchmark(tmpl, 100, full, 2024));
  const auto b = compute_metrics(run_benchmark(tmpl, 100, no_obstacles, 2024));
  const auto c = compute_metrics(run_benchmark(tmpl, 100, no_completion, 2024));
  const double secs = seconds_since(t0);
  const bool hits_ok = a.rho_h <= 0.5 * b.rho_h;
  const double gain = a.rho_s_over_a - c.rho_s_over_a;
  const bool pass = hits_ok && gain >= 10.0 && secs <= 300.0;
  return {pass,
          fmt("rho_h %.2f%% with obstacles vs %.2f%% without (need <= half); "
              "rho_s/rho_a %.2f%% full vs %.2f%% without completion",
              a.rho_h, b.rho_h, a.rho_s_over_a, c.rho_s_over_a) +
              fmt(" (gain %.2f pp, need >= 10); %.1f s (<= 300)", gain, secs)};
}

// ---------------------------------------------------------------- 3
Outcome chamfer_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> size(10, 2000);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  double worst = 0;
  for (int t = 0; t < 200; ++t) {
    Eigen::Matrix3Xd p(3, size(rng)), q(3, size(rng));
    for (auto *m : {&p, &q})
      for (Eigen::Index i = 0; i < m->cols(); ++i)
        m->col(i) = Vec3(u(rng), u(rng), u(rng));
    const double fast = chamfer_loss<double>(p, q);
    const double slow = oracle::chamfer_loss<double>(p, q);
    worst = std::max(worst, std::abs(fast - slow) / std::max(slow, 1e-300));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs <= 30.0,
          fmt("200 pairs, worst relative error %.3g (<= 1e-9), %.1f s (<= 30)", worst,
              secs)};
}

// ---------------------------------------------------------------- 4
bool path_is_valid(const OccupancyGrid &g, const GridPath &p, const Cell &s,
                   const Cell &t) {
  if (p.cells.empty() || p.cells.front() != s || p.cells.back() != t)
    return false;
  double cost = 0;
  for (std::size_t i = 0; i < p.cells.size(); ++i) {
    const Cell &c = p.cells[i];
    if (!g.in_bounds(c) || g.occupied(c))
      return false;
    if (i == 0)
      continue;
    const Cell d = c - p.cells[i - 1];
    if (d.cwiseAbs().maxCoeff() != 1)
      return false;
    cost += g.resolution() * d.cast<double>().norm();
  }
  return std::abs(cost - p.cost) <= 1e-9;
}

Outcome planner_optimality() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(4);
  std::bernoulli_distribution occ(0.2);
  std::uniform_int_distribution<int> c(0, 31);
  int agree = 0, reachable = 0, valid = 0;
  for (int t = 0; t < 50; ++t) {
    OccupancyGrid grid(Vec3::Zero(), 0.005, {32, 32, 32});
    for (std::size_t i = 0; i < grid.cell_count(); ++i)
      grid.set_occupied(grid.unlinear(i), occ(rng));
    Cell s, g;
    do {
      s = Cell(c(rng), c(rng), c(rng));
    } while (grid.occupied(s));
    do {
      g = Cell(c(rng), c(rng), c(rng));
    } while (grid.occupied(g) || g == s);
    const auto a = astar(grid, s, g);
    const auto d = oracle::dijkstra(grid, s, g);
    if (a.has_value() != d.has_value())
      continue;
    if (!a) {
      ++agree;
      ++valid;
      continue;
    }
    ++reachable;
    agree += std::abs(a->cost - *d) <= 1e-9 * *d;
    valid += path_is_valid(grid, *a, s, g);
  }
  const double secs = seconds_since(t0);
  return {agree == 50 && valid == 50 && secs <= 30.0,
          fmt("%.0f/50 costs equal Dijkstra, %.0f/50 paths re-verified, %.0f reachable, "
              "%.1f s (<= 30)",
              agree, valid, reachable, secs)};
}

// ---------------------------------------------------------------- 5
struct RecoveryStats {
  int recovered = 0;
  int monotone = 0;
  double worst_deg = 0;
  double worst_mm = 0;
};

// Partial views of the prior (40-100% of the camera-facing surface) with the
// initial pose perturbed by up to 20 degrees and 1 cm.
RecoveryStats recovery_run(double noise) {
  const auto &prior = *StrawberryPrior::builtin();
  RngStream rng(CounterRng(5005));
  RecoveryStats s;
  for (int i = 0; i < 100; ++i) {
    const Mat3 hang = synth::axis_angle(Vec3::UnitX(), -std::numbers::pi / 2);
    const Mat3 tilt = synth::axis_angle(synth::unit(rng), rng.uniform(0, 0.35));
    const Pose truth = synth::pose_of(
        tilt * hang, Vec3(rng.uniform(-0.04, 0.04), rng.uniform(-0.03, 0.03),
                          rng.uniform(0.26, 0.36)));
    const auto partial = synth::partial_scan(prior, truth, 3000, rng.uniform(0.4, 1.0),
                                             noise, 7000 + i);
    const double angle = rng.uniform(0, 20.0) * std::numbers::pi / 180;
    const Vec3 dt = rng.uniform(0, 0.01) * synth::unit(rng);
    Pose init = truth;
    init.linear() = synth::axis_angle(synth::unit(rng), angle) * truth.linear();
    init.translation() += dt;
    const auto r = icp_refine(partial, prior, init, IcpParams{});
    const double deg =
        prior.rotation_error(r.pose.linear(), truth.linear()) * 180 / std::numbers::pi;
    const double mm = 1000 * (r.pose.translation() - truth.translation()).norm();
    s.worst_deg = std::max(s.worst_deg, deg);
    s.worst_mm = std::max(s.worst_mm, mm);
    s.recovered += deg <= 2.0 && mm <= 1.0;
    bool mono = true;
    for (std::size_t k = 1; k < r.residual_history.size(); ++k)
      mono = mono && r.residual_history[k] <= r.residual_history[k - 1];
    s.monotone += mono;
  }
  return s;
}

Outcome registration_recovery() {
  const auto clean = recovery_run(0.0);
  const auto noisy = recovery_run(0.001);
  return {clean.recovered >= 95 && clean.monotone == 100 && noisy.monotone == 100,
          fmt("%.0f/100 within 2 deg / 1 mm (need >= 95), residuals non-increasing in "
              "%.0f/100; worst %.2f deg, %.2f mm",
              clean.recovered, clean.monotone, clean.worst_deg, clean.worst_mm) +
              fmt("; with 1 mm point noise %.0f/100 recovered, %.0f/100 monotone",
                  noisy.recovered, noisy.monotone)};
}

// ---------------------------------------------------------------- 6
Outcome invariants() {
  std::vector<std::string> broken;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-0.05, 0.05);

  // Voxel centroids stay in their voxel.
  PointCloud c;
  for (int i = 0; i < 20000; ++i)
    c.points.push_back({Vec3(u(rng), u(rng), u(rng)), {}, Pixel{i % 200, i / 200}, 0});
  const VoxelParams vp{0.01, 5};
  for (const auto &p : voxel_downsample(c, vp).points) {
    const Vec3 center =
        ((p.position / vp.voxel_size).array().floor() + 0.5).matrix() * vp.voxel_size;
    if ((p.position - center).norm() > vp.voxel_size * std::sqrt(3.0) / 2) {
      broken.push_back("voxel centroid bound");
      break;
    }
  }

  // Median output values come from the input.
  std::uniform_int_distribution<int> val(0, 1200);
  DepthImage d(64, 48);
  for (auto &x : d.values)
    x = static_cast<std::uint16_t>(val(rng) < 300 ? 0 : val(rng));
  const std::set<std::uint16_t> in(d.values.begin(), d.values.end());
  const auto m = median_filter(d, 5);
  if (!std::all_of(m.values.begin(), m.values.end(),
                   [&](std::uint16_t x) { return in.count(x) > 0; }) ||
      m != oracle::median(d, 5))
    broken.push_back("median value containment");

  // Mask partition: extractions are disjoint and cover the covered points.
  std::uniform_int_distribution<int> lab(0, 3);
  std::vector<InstanceMask> masks;
  for (int k = 0; k < 3; ++k)
    masks.emplace_back(200, 100, k, Ripeness::ripe);
  for (int v = 0; v < 100; ++v)
    for (int w = 0; w < 200; ++w)
      if (const int l = lab(rng); l < 3)
        masks[l].set(w, v);
  std::size_t total = 0, covered = 0;
  for (const auto &mk : masks)
    total += extract_masked(c, mk).size();
  for (const auto &p : c.points)
    for (const auto &mk : masks)
      covered += mk.test(p.source_pixel->u, p.source_pixel->v);
  if (total != covered)
    broken.push_back("mask partition");

  // Tie-break determinism under reordering.
  std::vector<PlanningInstance> tie;
  for (int id : {8, 3, 5}) {
    PointCloud one;
    one.points.push_back({Vec3(0.1 * (id % 2 ? 1 : -1), 0, 0.3), {}, {}, id});
    tie.push_back({id, Ripeness::ripe, one});
  }
  for (int k = 0; k < 6; ++k) {
    std::next_permutation(tie.begin(), tie.end(),
                          [](auto &a, auto &b) { return a.instance_id < b.instance_id; });
    if (tie[select_target(tie, Vec3::Zero())].instance_id != 3)
      broken.push_back("select_target tie-break");
  }

  // Ratio identities on a real benchmark.
  const SceneTemplate tmpl = cluttered();
  const auto r1 = run_benchmark(tmpl, 20, {}, 77, 1);
  const auto r2 = run_benchmark(tmpl, 20, {}, 77, 4);
  const auto mr = compute_metrics(r1);
  if (mr.rho_s > mr.rho_a || std::abs(mr.rho_s_over_a * mr.rho_a / 100 - mr.rho_s) > 1e-9 ||
      mr.rho_h < 0 || mr.rho_h > 100)
    broken.push_back("rho identities");
  for (const auto &t : r1) {
    if (t.success && !(t.attempted && t.trajectory_verified))
      broken.push_back("success without verified trajectory");
    if (t.target_id &&
        std::find(t.hit_ids.begin(), t.hit_ids.end(), *t.target_id) != t.hit_ids.end())
      broken.push_back("target among hits");
  }

  // Byte determinism, including across thread counts.
  if (trials_csv(r1) != trials_csv(r2) ||
      to_json(compute_metrics(r2)).dump() != to_json(mr).dump())
    broken.push_back("benchmark determinism");

  std::string detail = "voxel bounds, median containment, mask partition, tie-break, "
                       "rho identities, byte determinism";
  if (!broken.empty()) {
    detail = "broken:";
    for (const auto &b : broken)
      detail += " " + b + ";";
  }
  return {broken.empty(), detail};
}

// ---------------------------------------------------------------- 7
Outcome control_flow() {
  const auto run = [](const SceneConfig &s) {
    return run_pipeline(make_artifacts(s, render_rgbd(s)), {});
  };
  const auto ok = run(fixtures::lone_ripe());
  const auto none = run(fixtures::all_unripe());
  const auto blocked = run(fixtures::blocked_approach());
  const bool a = ok.attempted && ok.success && !ok.failure_reason;
  const bool b = !none.attempted && none.failure_reason == FailureReason::no_ripe;
  const bool c =
      !blocked.attempted && blocked.failure_reason == FailureReason::infeasible_path;
  return {a && b && c, std::string("success fixture ") + (a ? "ok" : "wrong") +
                           ", no-ripe fixture " + (b ? "ok" : "wrong") +
                           ", infeasible-path fixture " + (c ? "ok" : "wrong")};
}

} // namespace

int main() {
  report(1, "completion accuracy", completion_accuracy);
  report(2, "obstacle and completion ablations", ablations);
  report(3, "chamfer oracle equivalence", chamfer_oracle);
  report(4, "planner optimality", planner_optimality);
  report(5, "registration recovery", registration_recovery);
  report(6, "pipeline invariants", invariants);
  report(7, "grasp loop terminal outcomes", control_flow);
  return failures == 0 ? 0 : 1;
}
