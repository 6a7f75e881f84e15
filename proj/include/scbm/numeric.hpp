#pragma once

// Dense solvers on Eigen types: min-norm least squares, LP feasibility via a
// two-phase simplex, and nonnegative least squares.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scbm/error.hpp"

namespace scbm {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Ax = b with A m x n.
template <typename Scalar = double>
struct LinearSystem {
  MatrixX<Scalar> A;
  VectorX<Scalar> b;

  Eigen::Index rows() const { return A.rows(); }
  Eigen::Index cols() const { return A.cols(); }

  void check() const {
    if (A.rows() != b.size())
      throw InvalidArgument("linear system: A has " + std::to_string(A.rows()) + " rows, b has " +
                            std::to_string(b.size()));
  }

  template <typename Derived>
  Scalar relative_residual(const Eigen::MatrixBase<Derived>& x) const {
    const Scalar nb = b.norm();
    const Scalar r = (A * x - b).norm();
    return nb > Scalar(0) ? r / nb : r;
  }
};

/// Minimum-norm solution A^+ b through the SVD.
///
/// Singular values below tol * sigma_max count as zero. Throws InconsistentSystem
/// when ||Ax - b|| > tol * ||b|| (rank(A) != rank([A|b])).
template <typename Scalar>
VectorX<Scalar> min_norm_solve(const LinearSystem<Scalar>& sys, Scalar tol = Scalar(1e-10)) {
  sys.check();
  if (sys.cols() == 0) throw InvalidArgument("linear system has no unknowns");
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(sys.A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const Scalar cutoff = sv.size() ? tol * sv(0) : Scalar(0);
  VectorX<Scalar> ub = svd.matrixU().transpose() * sys.b;
  for (Eigen::Index i = 0; i < sv.size(); ++i) ub(i) = sv(i) > cutoff ? ub(i) / sv(i) : Scalar(0);
  VectorX<Scalar> x = svd.matrixV() * ub;
  const Scalar res = sys.relative_residual(x);
  if (!(res <= tol + std::numeric_limits<Scalar>::epsilon() * Scalar(100)))
    throw InconsistentSystem("inconsistent linear system, relative residual " + std::to_string(double(res)),
                             double(res));
  return x;
}

enum class LpStatus { Optimal, Infeasible, Unbounded };

template <typename Scalar>
struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  VectorX<Scalar> x;
  Scalar objective = Scalar(0);
  /// Phase-1 minimum of the summed constraint violation (row-equilibrated).
  Scalar violation = Scalar(0);
};

namespace detail {

// Dense tableau: rows 0..m-1 constraints, row m reduced costs; last column rhs.
template <typename Scalar>
struct Tableau {
  MatrixX<Scalar> T;
  std::vector<Eigen::Index> basis;
  Eigen::Index n_cols = 0;  // structural + artificial columns

  void pivot(Eigen::Index row, Eigen::Index col) {
    T.row(row) /= T(row, col);
    for (Eigen::Index i = 0; i < T.rows(); ++i) {
      if (i != row && T(i, col) != Scalar(0)) T.row(i) -= T(i, col) * T.row(row);
    }
    basis[static_cast<std::size_t>(row)] = col;
  }

  // Bland's rule; columns >= allowed_cols never enter. Returns false if unbounded.
  bool run(Eigen::Index allowed_cols, Scalar eps) {
    const Eigen::Index m = T.rows() - 1;
    const Eigen::Index rhs = T.cols() - 1;
    for (;;) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < allowed_cols; ++j) {
        if (T(m, j) < -eps) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      Eigen::Index leave = -1;
      Scalar best = std::numeric_limits<Scalar>::infinity();
      for (Eigen::Index i = 0; i < m; ++i) {
        if (T(i, enter) > eps) {
          const Scalar ratio = T(i, rhs) / T(i, enter);
          if (ratio < best - eps ||
              (ratio <= best + eps && leave >= 0 &&
               basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
            best = std::min(best, ratio);
            leave = i;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }
};

}  // namespace detail

/// min c'x subject to Ax = b, x >= 0 (two-phase simplex, Bland's rule).
///
/// Rows of [A|b] are equilibrated to unit max-norm first; the problem is
/// declared infeasible when the phase-1 violation exceeds feas_tol.
template <typename Scalar>
LpResult<Scalar> linprog(const VectorX<Scalar>& c, const LinearSystem<Scalar>& sys,
                         Scalar feas_tol = Scalar(1e-9)) {
  sys.check();
  if (c.size() != sys.cols()) throw InvalidArgument("linprog: cost vector length mismatch");
  const Eigen::Index m = sys.rows();
  const Eigen::Index n = sys.cols();
  const Scalar eps = std::numeric_limits<Scalar>::epsilon() * Scalar(1e3);

  detail::Tableau<Scalar> tab;
  tab.n_cols = n + m;
  tab.T = MatrixX<Scalar>::Zero(m + 1, n + m + 1);
  tab.basis.resize(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    Scalar scale = std::max(sys.A.row(i).cwiseAbs().maxCoeff(), std::abs(sys.b(i)));
    if (scale <= Scalar(0)) scale = Scalar(1);
    const Scalar sign = sys.b(i) < Scalar(0) ? Scalar(-1) : Scalar(1);
    tab.T.row(i).head(n) = sign * sys.A.row(i) / scale;
    tab.T(i, n + i) = Scalar(1);
    tab.T(i, n + m) = sign * sys.b(i) / scale;
    tab.basis[static_cast<std::size_t>(i)] = n + i;
  }
  // Phase 1: minimize the sum of artificials.
  for (Eigen::Index i = 0; i < m; ++i) {
    tab.T.row(m).head(n) -= tab.T.row(i).head(n);
    tab.T(m, n + m) -= tab.T(i, n + m);
  }
  tab.run(n + m, eps);

  LpResult<Scalar> out;
  out.violation = -tab.T(m, n + m);
  if (!(out.violation <= feas_tol)) {
    out.status = LpStatus::Infeasible;
    return out;
  }
  // Drive remaining artificials out of the basis where possible.
  for (Eigen::Index i = 0; i < m; ++i) {
    if (tab.basis[static_cast<std::size_t>(i)] < n) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(tab.T(i, j)) > eps * Scalar(1e3)) {
        tab.pivot(i, j);
        break;
      }
    }
  }
  // Phase 2.
  tab.T.row(m).setZero();
  tab.T.row(m).head(n) = c.transpose();
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index bcol = tab.basis[static_cast<std::size_t>(i)];
    if (bcol < n && tab.T(m, bcol) != Scalar(0)) tab.T.row(m) -= tab.T(m, bcol) * tab.T.row(i);
  }
  const bool bounded = tab.run(n, eps);
  out.x = VectorX<Scalar>::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index bcol = tab.basis[static_cast<std::size_t>(i)];
    if (bcol < n) out.x(bcol) = std::max(tab.T(i, n + m), Scalar(0));
  }
  out.objective = c.dot(out.x);
  out.status = bounded ? LpStatus::Optimal : LpStatus::Unbounded;
  return out;
}

/// True iff some x >= 0 satisfies Ax = b (phase-1 violation <= tol).
template <typename Scalar>
bool nonneg_feasible(const LinearSystem<Scalar>& sys, Scalar tol = Scalar(1e-9)) {
  const VectorX<Scalar> zero = VectorX<Scalar>::Zero(sys.cols());
  return linprog(zero, sys, tol).status != LpStatus::Infeasible;
}

/// Lawson-Hanson active-set solution of min ||Ax - b|| subject to x >= 0.
template <typename Scalar>
VectorX<Scalar> nnls(const LinearSystem<Scalar>& sys, Scalar tol = Scalar(1e-12), int max_iter = 0) {
  sys.check();
  const Eigen::Index n = sys.cols();
  if (max_iter <= 0) max_iter = 30 * static_cast<int>(n) + 30;
  VectorX<Scalar> x = VectorX<Scalar>::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  const Scalar scale = std::max(Scalar(1), sys.A.cwiseAbs().maxCoeff() * (sys.b.cwiseAbs().maxCoeff() + Scalar(1)));

  auto solve_passive = [&](VectorX<Scalar>& z) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    MatrixX<Scalar> Ap(sys.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) Ap.col(static_cast<Eigen::Index>(k)) = sys.A.col(idx[k]);
    const VectorX<Scalar> zp = Ap.completeOrthogonalDecomposition().solve(sys.b);
    z.setZero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zp(static_cast<Eigen::Index>(k));
  };

  for (int iter = 0; iter < max_iter; ++iter) {
    const VectorX<Scalar> w = sys.A.transpose() * (sys.b - sys.A * x);
    Eigen::Index best = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w(j) > tol * scale && (best < 0 || w(j) > w(best))) best = j;
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;
    VectorX<Scalar> z;
    for (int inner = 0; inner <= n; ++inner) {
      solve_passive(z);
      bool ok = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && z(j) <= Scalar(0)) ok = false;
      if (ok) break;
      Scalar alpha = Scalar(1);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= Scalar(0))
          alpha = std::min(alpha, x(j) / (x(j) - z(j)));
      }
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x(j) <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          x(j) = Scalar(0);
        }
      }
    }
    x = z;
  }
  return x;
}

}  // namespace scbm
