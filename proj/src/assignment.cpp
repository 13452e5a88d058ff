#include "reorient/assignment.hpp"

#include <algorithm>
#include <limits>

#include "reorient/error.hpp"

namespace reorient {

Assignment solve_assignment(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw Error(ErrorCode::SizeMismatch, "assignment needs a square matrix");
  Assignment out;
  out.row_to_col.assign(n, -1);
  if (n == 0) return out;

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is a virtual source.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);

  for (int row = 1; row <= n; ++row) {
    match[0] = row;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (int j = 1; j <= n; ++j) out.row_to_col[match[j] - 1] = j - 1;
  // Sum the matched entries directly; the dual value accumulates rounding.
  for (int i = 0; i < n; ++i) out.cost += cost(i, out.row_to_col[i]);
  return out;
}

}  // namespace reorient
