#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace berrypick {

// Exact nearest-neighbour index over the columns of a 3xN matrix.
//
// The tree is implicit: indices are permuted so that every subrange
// [lo, hi) stores its splitting point at the midpoint, with the smaller
// half on the left. Queries never approximate; distances are computed with
// the same expression a brute-force scan would use.
template <typename Scalar> class KdTree {
public:
  using Points = Eigen::Matrix<Scalar, 3, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, 3, 1>;

  struct Neighbor {
    Eigen::Index index = -1;
    Scalar squared_distance = std::numeric_limits<Scalar>::infinity();
  };

  KdTree() = default;
  explicit KdTree(Points points) : points_(std::move(points)) { build(); }

  const Points &points() const noexcept { return points_; }
  Eigen::Index size() const noexcept { return points_.cols(); }
  bool empty() const noexcept { return points_.cols() == 0; }

  Neighbor nearest(const Vector &query) const {
    Neighbor best;
    if (!empty())
      nearest_impl(query, 0, size(), 0, best);
    return best;
  }

  // k nearest neighbours sorted by ascending distance. Ties are resolved by
  // ascending column index so results are deterministic.
  std::vector<Neighbor> knn(const Vector &query, Eigen::Index k) const {
    std::vector<Neighbor> heap;
    if (k <= 0 || empty())
      return heap;
    heap.reserve(static_cast<std::size_t>(k) + 1);
    knn_impl(query, 0, size(), 0, k, heap);
    std::sort_heap(heap.begin(), heap.end(), closer);
    return heap;
  }

  // All points within `radius` of `query`, unordered.
  std::vector<Eigen::Index> radius_search(const Vector &query,
                                          Scalar radius) const {
    std::vector<Eigen::Index> out;
    if (!empty())
      radius_impl(query, 0, size(), 0, radius * radius, out);
    return out;
  }

private:
  static bool closer(const Neighbor &a, const Neighbor &b) {
    if (a.squared_distance != b.squared_distance)
      return a.squared_distance < b.squared_distance;
    return a.index < b.index;
  }

  void build() {
    order_.resize(static_cast<std::size_t>(size()));
    std::iota(order_.begin(), order_.end(), Eigen::Index{0});
    split_.assign(order_.size(), 0);
    build_impl(0, size(), 0);
  }

  void build_impl(Eigen::Index lo, Eigen::Index hi, int depth) {
    if (hi - lo <= 1)
      return;
    // Split on the axis of largest spread.
    Vector mn = Vector::Constant(std::numeric_limits<Scalar>::max());
    Vector mx = Vector::Constant(std::numeric_limits<Scalar>::lowest());
    for (Eigen::Index i = lo; i < hi; ++i) {
      mn = mn.cwiseMin(points_.col(order_[i]));
      mx = mx.cwiseMax(points_.col(order_[i]));
    }
    int axis = 0;
    (mx - mn).maxCoeff(&axis);
    const Eigen::Index mid = lo + (hi - lo) / 2;
    std::nth_element(order_.begin() + lo, order_.begin() + mid,
                     order_.begin() + hi, [&](Eigen::Index a, Eigen::Index b) {
                       return points_(axis, a) < points_(axis, b);
                     });
    split_[mid] = static_cast<std::uint8_t>(axis);
    build_impl(lo, mid, depth + 1);
    build_impl(mid + 1, hi, depth + 1);
  }

  Scalar sq_dist(const Vector &q, Eigen::Index idx) const {
    return (points_.col(idx) - q).squaredNorm();
  }

  void nearest_impl(const Vector &q, Eigen::Index lo, Eigen::Index hi,
                    int depth, Neighbor &best) const {
    if (lo >= hi)
      return;
    const Eigen::Index mid = lo + (hi - lo) / 2;
    const Eigen::Index idx = order_[mid];
    const Scalar d = sq_dist(q, idx);
    if (d < best.squared_distance ||
        (d == best.squared_distance && idx < best.index))
      best = {idx, d};
    if (hi - lo == 1)
      return;
    const int axis = split_[mid];
    const Scalar diff = q(axis) - points_(axis, idx);
    const bool left_first = diff < 0;
    if (left_first)
      nearest_impl(q, lo, mid, depth + 1, best);
    else
      nearest_impl(q, mid + 1, hi, depth + 1, best);
    if (diff * diff <= best.squared_distance) {
      if (left_first)
        nearest_impl(q, mid + 1, hi, depth + 1, best);
      else
        nearest_impl(q, lo, mid, depth + 1, best);
    }
  }

  void knn_impl(const Vector &q, Eigen::Index lo, Eigen::Index hi, int depth,
                Eigen::Index k, std::vector<Neighbor> &heap) const {
    if (lo >= hi)
      return;
    const Eigen::Index mid = lo + (hi - lo) / 2;
    const Eigen::Index idx = order_[mid];
    const Neighbor cand{idx, sq_dist(q, idx)};
    if (static_cast<Eigen::Index>(heap.size()) < k) {
      heap.push_back(cand);
      std::push_heap(heap.begin(), heap.end(), closer);
    } else if (closer(cand, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), closer);
      heap.back() = cand;
      std::push_heap(heap.begin(), heap.end(), closer);
    }
    if (hi - lo == 1)
      return;
    const int axis = split_[mid];
    const Scalar diff = q(axis) - points_(axis, idx);
    const bool left_first = diff < 0;
    if (left_first)
      knn_impl(q, lo, mid, depth + 1, k, heap);
    else
      knn_impl(q, mid + 1, hi, depth + 1, k, heap);
    const bool full = static_cast<Eigen::Index>(heap.size()) == k;
    if (!full || diff * diff <= heap.front().squared_distance) {
      if (left_first)
        knn_impl(q, mid + 1, hi, depth + 1, k, heap);
      else
        knn_impl(q, lo, mid, depth + 1, k, heap);
    }
  }

  void radius_impl(const Vector &q, Eigen::Index lo, Eigen::Index hi,
                   int depth, Scalar r2,
                   std::vector<Eigen::Index> &out) const {
    if (lo >= hi)
      return;
    const Eigen::Index mid = lo + (hi - lo) / 2;
    const Eigen::Index idx = order_[mid];
    if (sq_dist(q, idx) <= r2)
      out.push_back(idx);
    if (hi - lo == 1)
      return;
    const int axis = split_[mid];
    const Scalar diff = q(axis) - points_(axis, idx);
    if (diff < 0 || diff * diff <= r2)
      radius_impl(q, lo, mid, depth + 1, r2, out);
    if (diff >= 0 || diff * diff <= r2)
      radius_impl(q, mid + 1, hi, depth + 1, r2, out);
  }

  Points points_;
  std::vector<Eigen::Index> order_;
  std::vector<std::uint8_t> split_;
};

} // namespace berrypick
