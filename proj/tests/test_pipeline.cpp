#include <doctest.h>

#include <filesystem>

#include "berrypick/errors.hpp"
#include "berrypick/io.hpp"
#include "berrypick/pipeline.hpp"
#include "fixtures.hpp"

using namespace berrypick;
namespace fs = std::filesystem;

namespace {

SceneArtifacts artifacts(const SceneConfig &s) {
  return make_artifacts(s, render_rgbd(s));
}

fs::path scratch(const std::string &name) {
  const fs::path dir = fs::temp_directory_path() / "berrypick_test_pipeline" / name;
  fs::remove_all(dir);
  return dir;
}

// Completion stand-in: the prior placed at the partial centroid.
class CentroidCompleter final : public ShapeCompleter {
public:
  CompletionResult complete(const PointCloud &partial) const override {
    ++calls;
    CompletionResult r;
    r.pose.translation() = partial.centroid();
    r.levels = prior().sample_levels(r.pose, CounterRng(0));
    return r;
  }
  const StrawberryPrior &prior() const override { return *StrawberryPrior::builtin(); }
  mutable int calls = 0;
};

TrialResult trial(int detections, bool attempted, bool success, int hits = 0) {
  TrialResult t;
  t.detections = detections;
  t.attempted = attempted;
  t.success = success;
  for (int i = 0; i < hits; ++i)
    t.hit_ids.push_back(i + 10);
  return t;
}

} // namespace

TEST_CASE("lone ripe berry is picked") {
  const auto r = run_pipeline(artifacts(fixtures::lone_ripe()), {});
  CHECK(r.detections == 1);
  CHECK(r.attempted);
  CHECK(r.success);
  CHECK(r.hit_ids.empty());
  CHECK(!r.failure_reason);
  CHECK(r.trajectory_verified);
  REQUIRE(r.cd_mm.size() == 1);
  CHECK(r.cd_mm[0].cd_mm < 2.0);
}

TEST_CASE("unripe-only scene ends without an attempt") {
  const auto r = run_pipeline(artifacts(fixtures::all_unripe()), {});
  CHECK(r.detections == 2);
  CHECK(!r.attempted);
  CHECK(r.failure_reason == FailureReason::no_ripe);
}

TEST_CASE("blocked approach is infeasible") {
  const auto r = run_pipeline(artifacts(fixtures::blocked_approach()), {});
  CHECK(r.detections == 2);
  CHECK(!r.attempted);
  CHECK(r.failure_reason == FailureReason::infeasible_path);
  CHECK(r.target_id == 1);

  PipelineConfig open;
  open.use_obstacles = false;
  CHECK(run_pipeline(artifacts(fixtures::blocked_approach()), open).attempted);
}

TEST_CASE("any completer can drive the pipeline") {
  CentroidCompleter c;
  const auto out = run_pipeline_detailed(artifacts(fixtures::blocked_approach()), {}, c);
  CHECK(c.calls == 2);
  CHECK(out.instances.size() == 2);
  CHECK(out.instances[0].cloud.size() == 4096);

  PipelineConfig partial_only;
  partial_only.use_completion = false;
  CentroidCompleter unused;
  const auto p = run_pipeline_detailed(artifacts(fixtures::lone_ripe()), partial_only, unused);
  CHECK(unused.calls == 0);
  CHECK(p.trial.cd_mm.empty());
  CHECK(p.trial.attempted);
}

TEST_CASE("inconsistent artifacts are rejected") {
  auto a = artifacts(fixtures::lone_ripe());
  a.depth = DepthImage();
  CHECK_THROWS_AS(run_pipeline(a, {}), InputError);
  a = artifacts(fixtures::lone_ripe());
  a.masks[0].instance_id = 77;
  CHECK_THROWS_AS(run_pipeline(a, {}), InputError);
  a = artifacts(fixtures::lone_ripe());
  a.masks[0] = InstanceMask(3, 3, 1, Ripeness::ripe);
  CHECK_THROWS_AS(run_pipeline(a, {}), InputError);
}

TEST_CASE("scene directories round trip") {
  const auto scene = fixtures::blocked_approach();
  const auto rendered = render_rgbd(scene);
  const auto dir = scratch("scene");
  save_scene_dir(dir, scene, rendered);
  const auto loaded = load_scene_dir(dir);
  CHECK(loaded.depth == rendered.depth);
  CHECK(loaded.rgb == rendered.rgb);
  REQUIRE(loaded.masks.size() == 2);
  CHECK(loaded.masks[1].bits == rendered.truth.instances[1].mask.bits);
  CHECK(loaded.truth.instances[0].clouds[2].positions() ==
        rendered.truth.instances[0].clouds[2].positions());
  CHECK((loaded.truth.instances[1].center - rendered.truth.instances[1].center).norm() <
        1e-15);
  const auto a = run_pipeline(loaded, {});
  const auto b = run_pipeline(make_artifacts(scene, rendered), {});
  CHECK(trials_csv({a}) == trials_csv({b}));
  CHECK_THROWS_AS(load_scene_dir(dir / "nope"), InputError);
}

TEST_CASE("metrics arithmetic") {
  std::vector<TrialResult> perfect(5, trial(1, true, true));
  const auto p = compute_metrics(perfect);
  CHECK(p.rho_a == 100.0);
  CHECK(p.rho_s == 100.0);
  CHECK(p.rho_h == 0.0);
  CHECK(std::isnan(p.cd_mean));

  // 48 detections, 43 attempts, 38 successes.
  std::vector<TrialResult> table;
  for (int i = 0; i < 48; ++i)
    table.push_back(trial(1, i < 43, i < 38));
  const auto t = compute_metrics(table);
  CHECK(t.rho_a == doctest::Approx(89.583333).epsilon(1e-6));
  CHECK(t.rho_s == doctest::Approx(79.166667).epsilon(1e-6));
  CHECK(t.rho_s_over_a == doctest::Approx(88.372093).epsilon(1e-6));
  CHECK(t.rho_s_over_a * t.rho_a / 100 == doctest::Approx(t.rho_s).epsilon(1e-9));
  CHECK(t.rho_s <= t.rho_a);

  std::vector<TrialResult> hits;
  for (int i = 0; i < 30; ++i)
    hits.push_back(trial(2, true, i % 2 == 0, i < 13 ? 1 + i % 3 : 0));
  const auto h = compute_metrics(hits);
  CHECK(h.rho_h == doctest::Approx(43.333333).epsilon(1e-6));
  CHECK(h.hit_trials == 13);
  CHECK(h.berries_hit == 5 * 1 + 4 * 2 + 4 * 3);

  CHECK_THROWS_AS(compute_metrics({}), ParameterError);
}

TEST_CASE("report files") {
  std::vector<TrialResult> results;
  for (int i = 0; i < 7; ++i) {
    auto t = trial(3, i % 2 == 0, i % 4 == 0, i == 2);
    t.scene_id = i;
    if (!t.attempted)
      t.failure_reason = FailureReason::infeasible_path;
    t.cd_mm.push_back({1, 0.5 + i});
    results.push_back(t);
  }
  const auto report = compute_metrics(results);
  CHECK(report.cd_median == doctest::Approx(3.5));
  auto baseline = report;
  baseline.rho_h = 50;
  const auto dir = scratch("report");
  emit_report(report, results, dir, baseline);
  CHECK(metrics_from_json(nlohmann::json::parse(io::read_text(dir / "metrics.json"))) ==
        report);
  const auto csv = io::read_text(dir / "trials.csv");
  CHECK(csv.rfind("scene_id,detections,attempted,success,n_hits,failure_reason,"
                  "cd_mm_mean\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 8);
  const auto cmp = io::read_text(dir / "comparison.csv");
  CHECK(cmp.find("rho_h,50,") != std::string::npos);

  // NaN statistics survive as null.
  const auto empty_cd = compute_metrics({trial(1, false, false)});
  CHECK(std::isnan(metrics_from_json(to_json(empty_cd)).cd_mean));

  io::write_text(dir / "plain", "x");
  CHECK_THROWS_AS(emit_report(report, results, dir / "plain" / "sub"), IoError);
}

TEST_CASE("config json") {
  PipelineConfig c;
  c.icp.restart_count = 2;
  c.p_ee = Vec3(0.1, 0.2, 0.3);
  c.use_obstacles = false;
  c.rng_seed = 99;
  const auto back = pipeline_config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(pipeline_config_from_json(nlohmann::json::object()).grid_resolution == 0.005);

  auto j = to_json(c);
  j["icp"]["bogus"] = 1;
  CHECK_THROWS_AS(pipeline_config_from_json(j), InputError);
  j = to_json(c);
  j["voxel"]["voxel_size"] = -1;
  CHECK_THROWS_AS(pipeline_config_from_json(j), InputError);
  j = to_json(c);
  j["p_ee"] = {1, 2};
  CHECK_THROWS_AS(pipeline_config_from_json(j), InputError);
}

TEST_CASE("benchmarks are deterministic and thread independent") {
  SceneTemplate t;
  t.n_berries = 3;
  t.n_leaves_max = 1;
  const auto a = run_benchmark(t, 6, {}, 42, 1);
  const auto b = run_benchmark(t, 6, {}, 42, 3);
  CHECK(a.size() == 6);
  CHECK(trials_csv(a) == trials_csv(b));
  CHECK(to_json(compute_metrics(a)) == to_json(compute_metrics(b)));
  CHECK(trials_csv(run_benchmark(t, 6, {}, 43, 2)) != trials_csv(a));

  SceneTemplate one;
  one.n_berries = 1;
  CHECK(run_benchmark(one, 1, {}, 0).size() == 1);
  CHECK_THROWS_AS(run_benchmark(one, 0, {}, 0), ParameterError);
}
