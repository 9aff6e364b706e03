#pragma once

#include <cmath>

#include "berrypick/errors.hpp"
#include "berrypick/kdtree.hpp"
#include "berrypick/types.hpp"

namespace berrypick {

namespace detail {

// Sum over columns of `from` of f(squared distance to nearest column of `to`).
template <typename Scalar, typename F>
Scalar nn_sum(const Eigen::Matrix<Scalar, 3, Eigen::Dynamic> &from,
              const KdTree<Scalar> &to, F f) {
  Scalar sum = 0;
  for (Eigen::Index i = 0; i < from.cols(); ++i)
    sum += f(to.nearest(from.col(i)).squared_distance);
  return sum;
}

template <typename Scalar>
void require_nonempty(const Eigen::Matrix<Scalar, 3, Eigen::Dynamic> &p,
                      const Eigen::Matrix<Scalar, 3, Eigen::Dynamic> &q) {
  if (p.cols() == 0 || q.cols() == 0)
    throw ParameterError("chamfer distance of an empty cloud");
}

} // namespace detail

/// Unnormalised squared Chamfer distance: sum over both directions of the
/// squared distance to the nearest neighbour in the other cloud.
template <typename Scalar>
Scalar chamfer_loss(const Eigen::Matrix<Scalar, 3, Eigen::Dynamic> &p,
                    const Eigen::Matrix<Scalar, 3, Eigen::Dynamic> &q) {
  detail::require_nonempty(p, q);
  const KdTree<Scalar> tp(p), tq(q);
  const auto id = [](Scalar d2) { return d2; };
  return detail::nn_sum(p, tq, id) + detail::nn_sum(q, tp, id);
}

/// Symmetric mean nearest-neighbour Euclidean distance, in the input unit.
template <typename Scalar>
Scalar chamfer_mean_distance(const Eigen::Matrix<Scalar, 3, Eigen::Dynamic> &p,
                             const Eigen::Matrix<Scalar, 3, Eigen::Dynamic> &q) {
  detail::require_nonempty(p, q);
  const KdTree<Scalar> tp(p), tq(q);
  const auto root = [](Scalar d2) { return std::sqrt(d2); };
  const Scalar a = detail::nn_sum(p, tq, root) / static_cast<Scalar>(p.cols());
  const Scalar b = detail::nn_sum(q, tp, root) / static_cast<Scalar>(q.cols());
  return Scalar(0.5) * (a + b);
}

double chamfer_loss(const PointCloud &p, const PointCloud &q);

/// chamfer_mean_distance of clouds in meters, reported in millimeters.
double chamfer_metric_mm(const PointCloud &p, const PointCloud &q);

/// Weighted sum of per-level chamfer_loss against ground truth of matching
/// density.
double hierarchical_loss(const CloudTriple &preds, const CloudTriple &truths,
                         const LossWeights &w);

} // namespace berrypick
