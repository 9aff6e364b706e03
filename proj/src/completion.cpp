#include "berrypick/completion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "berrypick/chamfer.hpp"
#include "berrypick/errors.hpp"

namespace berrypick {

namespace {

constexpr std::size_t kMinPoints = 10;

// Truncated objective and the data needed for one Gauss-Newton step. All
// quantities are in the prior's canonical frame (meters).
struct Evaluation {
  double objective = 0; // mean of min(r^2, tau^2)
  std::size_t inliers = 0;
  double abs_sum = 0;
  Eigen::Matrix<double, 6, 6> jtj = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 1> jtr = Eigen::Matrix<double, 6, 1>::Zero();
};

// `to_prior` maps camera-frame points into the canonical prior frame.
Evaluation evaluate(const Eigen::Matrix3Xd &pts, const StrawberryPrior &prior,
                    const Pose &to_prior, double tau, bool with_jacobian) {
  Evaluation ev;
  const double tau2 = tau * tau;
  double sum = 0;
  for (Eigen::Index i = 0; i < pts.cols(); ++i) {
    const Vec3 q = to_prior * Vec3(pts.col(i));
    const auto hit = prior.closest(q);
    if (hit.distance > tau) {
      sum += tau2;
      continue;
    }
    const double r = hit.plane_distance;
    sum += std::min(r * r, tau2);
    ++ev.inliers;
    ev.abs_sum += std::abs(r);
    if (with_jacobian) {
      Eigen::Matrix<double, 6, 1> j;
      j << q.cross(hit.normal), hit.normal;
      ev.jtj.noalias() += j * j.transpose();
      ev.jtr.noalias() += j * r;
    }
  }
  ev.objective = sum / static_cast<double>(pts.cols());
  return ev;
}

Pose apply_increment(const Eigen::Matrix<double, 6, 1> &delta,
                     const Pose &to_prior) {
  const Vec3 w = delta.head<3>();
  const double angle = w.norm();
  Mat3 r = Mat3::Identity();
  if (angle > 0)
    r = Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
  Pose out = Pose::Identity();
  out.linear() = r * to_prior.linear();
  out.translation() = r * to_prior.translation() + delta.tail<3>();
  return out;
}

struct StartResult {
  Pose to_prior;
  Evaluation final_eval;
  std::vector<double> history;
  int iterations = 0;
};

StartResult refine_start(const Eigen::Matrix3Xd &pts,
                         const StrawberryPrior &prior, const Pose &init,
                         const IcpParams &params) {
  const double tau = params.max_correspondence_dist_mm / 1000.0;
  StartResult s;
  s.to_prior = init.inverse();
  Evaluation cur = evaluate(pts, prior, s.to_prior, tau, true);
  s.history.push_back(1000.0 * std::sqrt(cur.objective));
  if (cur.inliers == 0) {
    s.final_eval = cur;
    return s;
  }
  for (int it = 0; it < params.max_iterations; ++it) {
    // Damping keeps the system solvable along symmetry directions of the
    // prior (e.g. spin about an axisymmetric berry's axis).
    Eigen::Matrix<double, 6, 6> a = cur.jtj;
    const double damp = 1e-9 * std::max(a.trace(), 1e-12) + 1e-15;
    a.diagonal().array() += damp;
    const Eigen::Matrix<double, 6, 1> step = a.ldlt().solve(-cur.jtr);
    bool accepted = false;
    double scale = 1.0;
    for (int tries = 0; tries < 6 && !accepted; ++tries, scale *= 0.5) {
      const Pose cand = apply_increment(scale * step, s.to_prior);
      Evaluation next = evaluate(pts, prior, cand, tau, true);
      if (next.inliers > 0 && next.objective <= cur.objective) {
        const double before = 1000.0 * std::sqrt(cur.objective);
        const double after = 1000.0 * std::sqrt(next.objective);
        s.to_prior = cand;
        cur = std::move(next);
        s.history.push_back(after);
        ++s.iterations;
        accepted = true;
        if (before - after < params.convergence_tol_mm) {
          s.final_eval = cur;
          return s;
        }
      }
    }
    if (!accepted)
      break;
  }
  s.final_eval = cur;
  return s;
}

std::optional<int> majority_instance(const PointCloud &cloud) {
  std::map<int, int> counts;
  for (const auto &p : cloud.points)
    if (p.instance_id)
      ++counts[*p.instance_id];
  if (counts.empty())
    return std::nullopt;
  return std::max_element(counts.begin(), counts.end(),
                          [](const auto &a, const auto &b) {
                            return a.second < b.second;
                          })
      ->first;
}

} // namespace

void validate(const IcpParams &p) {
  if (p.max_iterations <= 0 || !(p.convergence_tol_mm > 0) ||
      !(p.max_correspondence_dist_mm > 0) || p.restart_count < 0)
    throw ParameterError("ICP parameters must be positive");
}

Pose init_pose(const PointCloud &partial, const StrawberryPrior &prior) {
  if (partial.size() < kMinPoints)
    throw InsufficientDataError("need at least " + std::to_string(kMinPoints) +
                                " points to initialise, got " +
                                std::to_string(partial.size()));
  const Eigen::Matrix3Xd pts = partial.positions();
  const Vec3 mean = pts.rowwise().mean();
  const Eigen::Matrix3Xd centered = pts.colwise() - mean;
  const Mat3 cov = centered * centered.transpose() / static_cast<double>(pts.cols());
  Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
  const Vec3 lead = es.eigenvectors().col(2);

  Pose pose = Pose::Identity();
  pose.linear() =
      Eigen::Quaterniond::FromTwoVectors(Vec3::UnitZ(), lead).toRotationMatrix();

  const Vec3 ray = mean.norm() > 1e-9 ? Vec3(mean.normalized()) : Vec3::UnitZ();
  std::vector<double> along(static_cast<std::size_t>(pts.cols()));
  for (Eigen::Index i = 0; i < pts.cols(); ++i)
    along[static_cast<std::size_t>(i)] = ray.dot(pts.col(i));
  // Robust nearest surface: a low percentile rather than the minimum.
  const auto k = static_cast<std::size_t>(0.02 * static_cast<double>(along.size()));
  std::nth_element(along.begin(), along.begin() + static_cast<long>(k), along.end());
  const double near = along[k];
  const double depth = prior.extent_along(pose.linear().transpose() * ray);
  const Vec3 lateral = mean - ray.dot(mean) * ray;
  pose.translation() = lateral + (near + 0.5 * depth) * ray;
  return pose;
}

IcpResult icp_refine(const PointCloud &partial, const StrawberryPrior &prior,
                     const Pose &init, const IcpParams &params) {
  validate(params);
  if (partial.empty())
    throw InsufficientDataError("empty partial cloud");
  const Eigen::Matrix3Xd pts = partial.positions();

  const double pi = std::numbers::pi;
  std::vector<Mat3> offsets = {
      Mat3::Identity(),
      Eigen::AngleAxisd(pi, Vec3::UnitX()).toRotationMatrix()};
  const Mat3 quarter[] = {
      Eigen::AngleAxisd(pi / 2, Vec3::UnitX()).toRotationMatrix(),
      Eigen::AngleAxisd(pi / 2, Vec3::UnitY()).toRotationMatrix(),
      Eigen::AngleAxisd(-pi / 2, Vec3::UnitX()).toRotationMatrix(),
      Eigen::AngleAxisd(-pi / 2, Vec3::UnitY()).toRotationMatrix(),
      Eigen::AngleAxisd(pi / 2, Vec3::UnitZ()).toRotationMatrix() *
          Eigen::AngleAxisd(pi / 2, Vec3::UnitX()).toRotationMatrix(),
      Eigen::AngleAxisd(pi / 2, Vec3::UnitZ()).toRotationMatrix() *
          Eigen::AngleAxisd(-pi / 2, Vec3::UnitX()).toRotationMatrix(),
  };
  for (int i = 0; i < params.restart_count; ++i)
    offsets.push_back(quarter[i % 6]);

  std::optional<StartResult> best;
  for (const auto &off : offsets) {
    Pose start = init;
    start.linear() = init.linear() * off;
    auto res = refine_start(pts, prior, start, params);
    if (res.final_eval.inliers == 0)
      continue;
    if (!best || res.final_eval.objective < best->final_eval.objective)
      best = std::move(res);
  }
  if (!best)
    throw RegistrationError("no correspondences within " +
                            std::to_string(params.max_correspondence_dist_mm) +
                            " mm");
  IcpResult out;
  out.pose = best->to_prior.inverse();
  out.fitness_mm = 1000.0 * best->final_eval.abs_sum /
                   static_cast<double>(best->final_eval.inliers);
  out.inlier_fraction = static_cast<double>(best->final_eval.inliers) /
                        static_cast<double>(pts.cols());
  out.residual_history = std::move(best->history);
  out.iterations = best->iterations;
  return out;
}

CompletionResult complete_cloud(const PointCloud &partial,
                                const StrawberryPrior &prior,
                                const IcpParams &params,
                                std::uint64_t sample_seed) {
  const Pose init = init_pose(partial, prior);
  const IcpResult reg = icp_refine(partial, prior, init, params);
  CompletionResult out;
  out.pose = reg.pose;
  out.fitness_mm = reg.fitness_mm;
  out.levels = prior.sample_levels(reg.pose, CounterRng(sample_seed, 0xc0));
  if (const auto id = majority_instance(partial))
    for (auto &level : out.levels)
      for (auto &p : level.points)
        p.instance_id = id;
  return out;
}

CompletionScores evaluate_completion(const CompletionResult &result,
                                     const CloudTriple &truth,
                                     const LossWeights &w) {
  for (std::size_t i = 0; i < 3; ++i)
    if (result.levels[i].size() != truth[i].size())
      throw ParameterError("density mismatch at level " + std::to_string(i));
  CompletionScores s;
  s.hierarchical = hierarchical_loss(result.levels, truth, w);
  for (std::size_t i = 0; i < 3; ++i)
    s.metric_mm[i] = chamfer_metric_mm(result.levels[i], truth[i]);
  return s;
}

} // namespace berrypick
