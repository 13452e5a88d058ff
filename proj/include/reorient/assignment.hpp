#pragma once

#include <vector>

#include <Eigen/Core>

namespace reorient {

struct Assignment {
  std::vector<int> row_to_col;
  double cost = 0.0;
};

/// Exact minimum-cost perfect matching on a square cost matrix
/// (shortest augmenting path Hungarian method, O(n^3)).
Assignment solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace reorient
