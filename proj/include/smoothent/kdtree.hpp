#pragma once

#include <vector>

#include <Eigen/Dense>

namespace smoothent {

/// Median-split kd-tree over the rows of a point matrix, built for repeated
/// nearest-neighbor queries. The tree keeps its own copy of the points.
class KdTree {
 public:
  explicit KdTree(Eigen::MatrixXd points, int leaf_size = 16);

  /// Euclidean distance from row `self` to its nearest other row.
  [[nodiscard]] double nearest_distance_excluding(Eigen::Index self) const;

  /// Distance from an arbitrary query point to the nearest row.
  [[nodiscard]] double nearest_distance(
      const Eigen::Ref<const Eigen::VectorXd>& query) const;

 private:
  struct Node {
    int axis = -1;         // -1 marks a leaf
    double split = 0.0;
    Eigen::Index begin = 0, end = 0;  // leaf range into order_
    int left = -1, right = -1;
  };

  int build(Eigen::Index begin, Eigen::Index end);
  void search(int node, const double* query, Eigen::Index exclude,
              double& best_sq) const;

  Eigen::MatrixXd points_;
  std::vector<Eigen::Index> order_;
  std::vector<Node> nodes_;
  int leaf_size_;
};

}  // namespace smoothent
