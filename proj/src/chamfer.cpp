#include "berrypick/chamfer.hpp"

namespace berrypick {

double chamfer_loss(const PointCloud &p, const PointCloud &q) {
  return chamfer_loss<double>(p.positions(), q.positions());
}

double chamfer_metric_mm(const PointCloud &p, const PointCloud &q) {
  return 1000.0 * chamfer_mean_distance<double>(p.positions(), q.positions());
}

double hierarchical_loss(const CloudTriple &preds, const CloudTriple &truths,
                         const LossWeights &w) {
  validate(w);
  for (std::size_t i = 0; i < 3; ++i)
    if (preds[i].empty() || truths[i].empty())
      throw ParameterError("hierarchical_loss: empty cloud at level " +
                           std::to_string(i));
  const double lambda[3] = {w.lambda0, w.lambda1, w.lambda2};
  double total = 0;
  for (std::size_t i = 0; i < 3; ++i)
    if (lambda[i] != 0)
      total += lambda[i] * chamfer_loss(preds[i], truths[i]);
  return total;
}

} // namespace berrypick
