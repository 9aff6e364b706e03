// berrypick: scene generation, rendering, completion, planning and
// benchmark harness on the command line.
//
// Exit codes: 0 success, 1 bad input or arguments, 2 I/O failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "berrypick/chamfer.hpp"
#include "berrypick/completion.hpp"
#include "berrypick/errors.hpp"
#include "berrypick/filters.hpp"
#include "berrypick/io.hpp"
#include "berrypick/pipeline.hpp"
#include "berrypick/scene.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace berrypick;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

json read_json(const fs::path &p) {
  try {
    return json::parse(io::read_text(p));
  } catch (const json::exception &e) {
    throw InputError(p.string() + ": " + e.what());
  }
}

PipelineConfig load_config(const Globals &g) {
  PipelineConfig cfg;
  if (!g.config.empty())
    cfg = pipeline_config_from_json(read_json(g.config));
  if (g.seed)
    cfg.rng_seed = *g.seed;
  return cfg;
}

void make_dir(const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw IoError(dir.string(), ec.message());
}

json vec_json(const Vec3 &v) { return {v.x(), v.y(), v.z()}; }

void print_metrics(const std::string &label, const MetricsReport &r) {
  std::cout << label << ": trials=" << r.trials << " detections=" << r.detections
            << " attempts=" << r.attempts << " successes=" << r.successes
            << " rho_a=" << r.rho_a << " rho_s=" << r.rho_s
            << " rho_s/rho_a=" << r.rho_s_over_a << " rho_h=" << r.rho_h
            << " cd_mean=" << r.cd_mean << " cd_median=" << r.cd_median << "\n";
}

// ---------------------------------------------------------------- commands

void cmd_gen_scene(const Globals &g, const std::string &tmpl_path) {
  const SceneTemplate tmpl =
      tmpl_path.empty() ? SceneTemplate{} : template_from_json(read_json(tmpl_path));
  const SceneConfig scene = generate_scene(tmpl, g.seed.value_or(0));
  make_dir(g.out);
  io::write_text(fs::path(g.out) / "scene.json", to_json(scene).dump(2) + "\n");
  std::cout << "wrote " << (fs::path(g.out) / "scene.json").string() << "\n";
}

void cmd_render(const Globals &g, const std::string &scene_path) {
  const SceneConfig scene = scene_from_json(read_json(scene_path));
  const RenderedScene rendered = render_rgbd(scene);
  save_scene_dir(g.out, scene, rendered);
  for (const auto &t : rendered.truth.instances)
    std::cout << "berry " << t.instance_id << " " << to_string(t.ripeness)
              << " visibility " << t.visibility << "\n";
}

void cmd_complete(const Globals &g, const std::string &partial_path,
                  const std::string &prior_arg) {
  const PipelineConfig cfg = load_config(g);
  std::shared_ptr<const StrawberryPrior> prior =
      prior_arg == "builtin"
          ? StrawberryPrior::builtin()
          : std::make_shared<const StrawberryPrior>(io::read_ply_mesh(prior_arg),
                                                    Densities{});
  PointCloud partial = io::read_ply(partial_path);
  if (partial.empty())
    throw InputError(partial_path + ": empty point cloud");
  partial = remove_outliers(partial, cfg.outlier);
  const CompletionResult c = complete_cloud(partial, *prior, cfg.icp, cfg.rng_seed);
  make_dir(g.out);
  for (int l = 0; l < 3; ++l)
    io::write_ply(fs::path(g.out) / ("p" + std::to_string(l) + ".ply"), c.levels[l]);
  const json report = {{"pose", pose_to_json(c.pose)},
                       {"fitness_mm", c.fitness_mm},
                       {"partial_points", partial.size()}};
  io::write_text(fs::path(g.out) / "completion.json", report.dump(2) + "\n");
  std::cout << "fitness " << c.fitness_mm << " mm\n";
}

void cmd_plan(const Globals &g, const std::string &scene_dir) {
  const PipelineConfig cfg = load_config(g);
  const SceneArtifacts scene = load_scene_dir(scene_dir);
  const PriorRegistrationCompleter completer(StrawberryPrior::builtin(), cfg.icp,
                                             cfg.rng_seed);
  const PipelineOutput out = run_pipeline_detailed(scene, cfg, completer);
  const TrialResult &t = out.trial;

  json waypoints = json::array();
  for (const auto &w : out.trajectory.waypoints)
    waypoints.push_back(vec_json(w));
  json plan = {
      {"target_id", t.target_id ? json(*t.target_id) : json(nullptr)},
      {"feasible", out.trajectory.feasible},
      {"waypoints", waypoints},
      {"length", out.trajectory.length},
      {"occupied_cells", out.occupied_cells},
      {"attempted", t.attempted},
      {"success", t.success},
      {"hit_ids", t.hit_ids},
      {"failure_reason",
       t.failure_reason ? json(std::string(to_string(*t.failure_reason)))
                        : json(nullptr)},
  };
  if (out.grasp)
    plan["grasp"] = {{"grasp_point", vec_json(out.grasp->grasp_point)},
                     {"approach_dir", vec_json(out.grasp->approach_dir)},
                     {"pregrasp_offset", out.grasp->pregrasp_offset}};
  else
    plan["grasp"] = nullptr;

  fs::path dest(g.out);
  if (dest.extension() != ".json") {
    make_dir(dest);
    dest /= "plan.json";
  } else if (dest.has_parent_path()) {
    make_dir(dest.parent_path());
  }
  io::write_text(dest, plan.dump(2) + "\n");
  std::cout << (t.success ? "success" : "failure");
  if (t.failure_reason)
    std::cout << " (" << to_string(*t.failure_reason) << ")";
  std::cout << "\n";
}

void cmd_bench(const Globals &g, int n, const std::string &tmpl_path,
               const std::string &ablate, int threads) {
  PipelineConfig cfg = load_config(g);
  const SceneTemplate tmpl =
      tmpl_path.empty() ? SceneTemplate{} : template_from_json(read_json(tmpl_path));
  const std::uint64_t seed = g.seed.value_or(0);

  const auto full = run_benchmark(tmpl, n, cfg, seed, threads);
  const MetricsReport full_report = compute_metrics(full);
  const fs::path out(g.out);
  emit_report(full_report, full, out / "full");
  print_metrics("full", full_report);

  if (ablate == "none")
    return;
  PipelineConfig variant = cfg;
  if (ablate == "obstacles")
    variant.use_obstacles = false;
  else
    variant.use_completion = false;
  const auto abl = run_benchmark(tmpl, n, variant, seed, threads);
  const MetricsReport abl_report = compute_metrics(abl);
  emit_report(abl_report, abl, out / ("no_" + ablate), full_report);
  io::write_text(out / "comparison.csv", comparison_csv(full_report, abl_report));
  print_metrics("no_" + ablate, abl_report);
}

void cmd_eval_cd(const std::string &pred, const std::string &truth) {
  const PointCloud a = io::read_ply(pred);
  const PointCloud b = io::read_ply(truth);
  if (a.empty() || b.empty())
    throw InputError("eval-cd: both clouds must be non-empty");
  const json r = {{"chamfer_metric_mm", chamfer_metric_mm(a, b)},
                  {"chamfer_loss", chamfer_loss(a, b)},
                  {"pred_points", a.size()},
                  {"truth_points", b.size()}};
  std::cout << r.dump(2) << "\n";
}

void cmd_report(const Globals &g, const std::string &run,
                const std::string &baseline) {
  const MetricsReport r = metrics_from_json(read_json(fs::path(run) / "metrics.json"));
  print_metrics(run, r);
  if (baseline.empty())
    return;
  const MetricsReport b =
      metrics_from_json(read_json(fs::path(baseline) / "metrics.json"));
  print_metrics(baseline, b);
  make_dir(g.out);
  const std::string csv = comparison_csv(b, r);
  io::write_text(fs::path(g.out) / "comparison.csv", csv);
  std::cout << csv;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"berrypick: occlusion-aware strawberry picking pipeline"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Pipeline config JSON");
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--out", g.out, "Output directory");

  std::string tmpl, scene_file, partial, prior = "builtin", scene_dir, ablate = "none";
  std::string pred, truth, run, baseline;
  int n = 10, threads = 1;

  auto *gen = app.add_subcommand("gen-scene", "Generate a random scene layout");
  gen->add_option("--template", tmpl, "Scene template JSON");

  auto *render = app.add_subcommand("render", "Render a scene to RGB-D artifacts");
  render->add_option("--scene", scene_file, "scene.json")->required();

  auto *complete = app.add_subcommand("complete", "Complete a partial cloud");
  complete->add_option("--partial", partial, "Partial cloud PLY")->required();
  complete->add_option("--prior", prior, "Prior mesh PLY or 'builtin'");

  auto *plan = app.add_subcommand("plan", "Run the grasp pipeline on a scene directory");
  plan->add_option("--scene-dir", scene_dir, "Rendered scene directory")->required();

  auto *bench = app.add_subcommand("bench", "Run a seeded multi-scene benchmark");
  bench->add_option("--n", n, "Number of scenes")->check(CLI::PositiveNumber);
  bench->add_option("--template", tmpl, "Scene template JSON");
  bench->add_option("--ablate", ablate, "Ablation to pair with the full run")
      ->check(CLI::IsMember({"none", "obstacles", "completion"}));
  bench->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto *eval = app.add_subcommand("eval-cd", "Chamfer distance between two clouds");
  eval->add_option("--pred", pred, "Predicted cloud PLY")->required();
  eval->add_option("--truth", truth, "Ground-truth cloud PLY")->required();

  auto *report = app.add_subcommand("report", "Summarise or compare benchmark runs");
  report->add_option("--run", run, "Benchmark output directory")->required();
  report->add_option("--baseline", baseline, "Baseline output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen)
      cmd_gen_scene(g, tmpl);
    else if (*render)
      cmd_render(g, scene_file);
    else if (*complete)
      cmd_complete(g, partial, prior);
    else if (*plan)
      cmd_plan(g, scene_dir);
    else if (*bench)
      cmd_bench(g, n, tmpl, ablate, threads);
    else if (*eval)
      cmd_eval_cd(pred, truth);
    else if (*report)
      cmd_report(g, run, baseline);
  } catch (const IoError &e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
