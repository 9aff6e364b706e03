#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "berrypick/prior.hpp"
#include "berrypick/types.hpp"

namespace berrypick {

struct IcpParams {
  int max_iterations = 50;
  double convergence_tol_mm = 1e-3;       // stop when RMS improves less
  double max_correspondence_dist_mm = 15.0;
  int restart_count = 4;                  // extra orthogonal initialisations
};

void validate(const IcpParams &p);

struct IcpResult {
  Pose pose = Pose::Identity(); // prior frame -> camera frame
  double fitness_mm = 0;        // mean |point-to-surface| over inliers
  double inlier_fraction = 0;
  // Truncated RMS residual (mm) after each accepted iteration of the
  // selected start, beginning with the initial pose.
  std::vector<double> residual_history;
  int iterations = 0;
};

struct CompletionResult {
  CloudTriple levels; // ascending density; levels[2] is the completed cloud
  Pose pose = Pose::Identity();
  double fitness_mm = 0;
};

struct CompletionScores {
  double hierarchical = 0;
  std::array<double, 3> metric_mm{};
};

/// Initial prior pose for a partial scan.
///
/// Rotation maps the prior's principal axis onto the partial's leading PCA
/// axis. The scan sees the near face only, so the centre is placed half the
/// prior's depth (along the viewing ray) behind the nearest observed surface,
/// laterally at the partial centroid. Needs at least 10 points.
Pose init_pose(const PointCloud &partial, const StrawberryPrior &prior);

/// Point-to-surface ICP of `partial` onto the posed prior.
///
/// Each start is refined by damped Gauss-Newton on point-to-plane residuals
/// against the prior surface. Correspondences farther than
/// max_correspondence_dist count as a constant truncated penalty, and a step
/// is accepted only if the truncated objective does not increase, so the
/// residual history is non-increasing. Starts are `init`, `init` flipped
/// end-over-end, and `restart_count` quarter-turn rotations of `init`; the
/// start with the lowest final objective wins.
///
/// Throws RegistrationError when no start has any correspondence.
IcpResult icp_refine(const PointCloud &partial, const StrawberryPrior &prior,
                     const Pose &init, const IcpParams &params);

/// Completes a partial cloud by registering the prior and sampling it at the
/// prior's three densities. Output points carry the partial's instance id.
CompletionResult complete_cloud(const PointCloud &partial,
                                const StrawberryPrior &prior,
                                const IcpParams &params,
                                std::uint64_t sample_seed = 0);

/// Weighted chamfer loss against ground truth plus per-level chamfer metric.
CompletionScores evaluate_completion(const CompletionResult &result,
                                     const CloudTriple &truth,
                                     const LossWeights &w);

/// Completion contract: a denoised partial cloud in, a multi-resolution
/// completion out. Alternative completers plug into the pipeline here.
class ShapeCompleter {
public:
  virtual ~ShapeCompleter() = default;
  virtual CompletionResult complete(const PointCloud &partial) const = 0;
  virtual const StrawberryPrior &prior() const = 0;
};

class PriorRegistrationCompleter final : public ShapeCompleter {
public:
  PriorRegistrationCompleter(std::shared_ptr<const StrawberryPrior> prior,
                             IcpParams params, std::uint64_t sample_seed = 0)
      : prior_(std::move(prior)), params_(params), seed_(sample_seed) {}

  CompletionResult complete(const PointCloud &partial) const override {
    return complete_cloud(partial, *prior_, params_, seed_);
  }
  const StrawberryPrior &prior() const override { return *prior_; }

private:
  std::shared_ptr<const StrawberryPrior> prior_;
  IcpParams params_;
  std::uint64_t seed_;
};

} // namespace berrypick
