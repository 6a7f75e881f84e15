#pragma once

// Kuhn-Munkres (Hungarian) assignment with row/column potentials, O(n^3).

#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace scbm {

/// Maximum-weight perfect matching on the zero-padded square completion of w.
///
/// Returns assignment[r] = column matched to row r, for r in [0, max(rows, cols)).
/// Indices beyond w's rows or columns denote padding.
template <typename Derived>
std::vector<int> max_weight_assignment(const Eigen::MatrixBase<Derived>& w) {
  using Scalar = typename Derived::Scalar;
  const int n = static_cast<int>(std::max(w.rows(), w.cols()));
  if (n == 0) return {};
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> cost =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  const Scalar top = w.size() ? w.maxCoeff() : Scalar(0);
  cost.setConstant(top);
  cost.topLeftCorner(w.rows(), w.cols()) = (top - w.array()).matrix();

  // 1-based potentials formulation; p[j] = row matched to column j.
  const Scalar inf = std::numeric_limits<Scalar>::max() / Scalar(4);
  std::vector<Scalar> u(n + 1, Scalar(0)), v(n + 1, Scalar(0));
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<Scalar> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      Scalar delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const Scalar cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
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
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

}  // namespace scbm
