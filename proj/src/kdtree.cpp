#include "smoothent/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace smoothent {

KdTree::KdTree(Eigen::MatrixXd points, int leaf_size)
    : points_(std::move(points)), leaf_size_(std::max(1, leaf_size)) {
  order_.resize(static_cast<std::size_t>(points_.rows()));
  std::iota(order_.begin(), order_.end(), Eigen::Index{0});
  nodes_.reserve(static_cast<std::size_t>(2 * points_.rows() / leaf_size_ + 8));
  build(0, points_.rows());
}

int KdTree::build(Eigen::Index begin, Eigen::Index end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  if (end - begin <= leaf_size_) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }
  // Split along the axis with the widest spread in this range.
  const Eigen::Index d = points_.cols();
  int axis = 0;
  double best_spread = -1.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (Eigen::Index i = begin; i < end; ++i) {
      const double v = points_(order_[static_cast<std::size_t>(i)], k);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      axis = static_cast<int>(k);
    }
  }
  const Eigen::Index mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](Eigen::Index a, Eigen::Index b) {
                     return points_(a, axis) < points_(b, axis);
                   });
  nodes_[id].axis = axis;
  nodes_[id].split = points_(order_[static_cast<std::size_t>(mid)], axis);
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(int node, const double* query, Eigen::Index exclude,
                    double& best_sq) const {
  const Node& nd = nodes_[static_cast<std::size_t>(node)];
  const Eigen::Index d = points_.cols();
  if (nd.axis < 0) {
    for (Eigen::Index i = nd.begin; i < nd.end; ++i) {
      const Eigen::Index row = order_[static_cast<std::size_t>(i)];
      if (row == exclude) continue;
      double s = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) {
        const double diff = points_(row, k) - query[k];
        s += diff * diff;
      }
      best_sq = std::min(best_sq, s);
    }
    return;
  }
  const double delta = query[nd.axis] - nd.split;
  const int near = delta < 0.0 ? nd.left : nd.right;
  const int far = delta < 0.0 ? nd.right : nd.left;
  search(near, query, exclude, best_sq);
  if (delta * delta < best_sq) search(far, query, exclude, best_sq);
}

double KdTree::nearest_distance_excluding(Eigen::Index self) const {
  double best_sq = std::numeric_limits<double>::infinity();
  const Eigen::VectorXd q = points_.row(self).transpose();
  search(0, q.data(), self, best_sq);
  return std::sqrt(best_sq);
}

double KdTree::nearest_distance(
    const Eigen::Ref<const Eigen::VectorXd>& query) const {
  double best_sq = std::numeric_limits<double>::infinity();
  const Eigen::VectorXd q = query;
  search(0, q.data(), -1, best_sq);
  return std::sqrt(best_sq);
}

}  // namespace smoothent
