#include "scbm/mmsbm.hpp"

#include <cmath>

namespace scbm {

namespace {

constexpr double kResidualTol = 1e-9;

void check_totals(const BlockMatrix& t1, const BlockMatrix& t2) {
  // Equal block sizes: n_p^2 sum(theta_p) must agree, i.e. K2^2 sum(theta1) = K1^2 sum(theta2).
  const double k1 = double(t1.dim()), k2 = double(t2.dim());
  const double a = k2 * k2 * t1.total(), b = k1 * k1 * t2.total();
  if (std::abs(a - b) > 1e-12 * std::max(std::abs(a), std::abs(b))) {
    const double rel = std::abs(a - b) / std::max(std::abs(a), std::abs(b));
    throw InconsistentSystem("factor block matrices imply different edge totals (relative gap " +
                                 std::to_string(rel) + ")",
                             rel);
  }
}

int tri(int r, int s, int k) {
  if (r > s) std::swap(r, s);
  return r * k - r * (r - 1) / 2 + (s - r);
}

}  // namespace

std::string to_string(NormalizerMethod m) {
  switch (m) {
    case NormalizerMethod::MinNorm: return "min_norm";
    case NormalizerMethod::Nnls: return "nnls";
    case NormalizerMethod::Lp: return "lp";
    case NormalizerMethod::None: return "none";
  }
  return "none";
}

LinearSystem<double> mmsbm_per_pair_system(const BlockMatrix& theta1, const BlockMatrix& theta2) {
  const BlockMatrix* th[2] = {&theta1, &theta2};
  const int k[2] = {int(theta1.dim()), int(theta2.dim())};
  const int n1 = k[0] * (k[0] + 1) / 2, n2 = k[1] * (k[1] + 1) / 2;
  const int offset[2] = {0, n1};
  LinearSystem<double> sys{Eigen::MatrixXd::Zero(n1 + n2, n1 + n2), Eigen::VectorXd::Zero(n1 + n2)};
  for (int p = 0; p < 2; ++p) {
    const int q = 1 - p;
    const double avg = 1.0 / (4.0 * k[q] * k[q]);
    for (int r = 0; r < k[p]; ++r) {
      for (int s = r; s < k[p]; ++s) {
        const int row = offset[p] + tri(r, s, k[p]);
        sys.b(row) = (*th[p])(r, s);
        sys.A(row, row) += 0.25 * (*th[p])(r, s);
        for (int a = 0; a < k[q]; ++a)
          for (int b = 0; b < k[q]; ++b) sys.A(row, offset[q] + tri(a, b, k[q])) += avg * (*th[q])(a, b);
      }
    }
  }
  return sys;
}

LinearSystem<double> mmsbm_per_combination_system(const BlockMatrix& theta1, const BlockMatrix& theta2) {
  const int k1 = int(theta1.dim()), k2 = int(theta2.dim());
  const CrossIndex index({k1, k2});
  const int kc = index.num_cross_blocks();
  const int rows = k1 * (k1 + 1) / 2 + k2 * (k2 + 1) / 2;
  LinearSystem<double> sys{Eigen::MatrixXd::Zero(rows, kc * (kc + 1) / 2), Eigen::VectorXd::Zero(rows)};
  auto cross = [&](int r, int rp) { return r * k2 + rp; };

  int row = 0;
  for (int r = 0; r < k1; ++r) {
    for (int s = r; s < k1; ++s, ++row) {
      sys.b(row) = theta1(r, s);
      for (int a = 0; a < k2; ++a)
        for (int b = 0; b < k2; ++b)
          sys.A(row, tri(cross(r, a), cross(s, b), kc)) += (theta1(r, s) + theta2(a, b)) / (4.0 * k2 * k2);
    }
  }
  for (int a = 0; a < k2; ++a) {
    for (int b = a; b < k2; ++b, ++row) {
      sys.b(row) = theta2(a, b);
      for (int r = 0; r < k1; ++r)
        for (int s = 0; s < k1; ++s)
          sys.A(row, tri(cross(r, a), cross(s, b), kc)) += (theta1(r, s) + theta2(a, b)) / (4.0 * k1 * k1);
    }
  }
  return sys;
}

MmsbmNormalizers mmsbm_normalizers_per_pair(const BlockMatrix& theta1, const BlockMatrix& theta2) {
  check_totals(theta1, theta2);
  const auto sys = mmsbm_per_pair_system(theta1, theta2);
  MmsbmNormalizers out;
  try {
    out.x = min_norm_solve(sys);
    out.residual = sys.relative_residual(out.x);
    if (out.x.minCoeff() >= 0.0) {
      out.feasible = true;
      out.method = NormalizerMethod::MinNorm;
      return out;
    }
  } catch (const InconsistentSystem& e) {
    out.residual = e.residual();
  }
  const auto lp = linprog(Eigen::VectorXd::Zero(sys.cols()).eval(), sys);
  if (lp.status == LpStatus::Infeasible) {
    out.message = "no nonnegative per-pair normalization exists";
    return out;
  }
  out.x = lp.x;
  out.residual = sys.relative_residual(out.x);
  out.feasible = true;
  out.method = NormalizerMethod::Lp;
  return out;
}

MmsbmNormalizers mmsbm_normalizers_per_combination(const BlockMatrix& theta1, const BlockMatrix& theta2) {
  check_totals(theta1, theta2);
  const auto sys = mmsbm_per_combination_system(theta1, theta2);
  MmsbmNormalizers out;
  out.x = min_norm_solve(sys);
  out.residual = sys.relative_residual(out.x);
  if (out.x.minCoeff() > 0.0) {
    out.feasible = true;
    out.method = NormalizerMethod::MinNorm;
    return out;
  }

  const Eigen::VectorXd nn = nnls(sys);
  const double nn_res = sys.relative_residual(nn);
  if (nn_res <= kResidualTol && nn.minCoeff() > 0.0) {
    out = {true, NormalizerMethod::Nnls, nn, nn_res, ""};
    return out;
  }

  // max t subject to A (y + t 1) = b, y >= 0, 0 <= t <= 1 (slack s).
  const Eigen::Index m = sys.rows(), n = sys.cols();
  LinearSystem<double> lp_sys{Eigen::MatrixXd::Zero(m + 1, n + 2), Eigen::VectorXd::Zero(m + 1)};
  lp_sys.A.topLeftCorner(m, n) = sys.A;
  lp_sys.A.col(n).head(m) = sys.A.rowwise().sum();
  lp_sys.A(m, n) = 1.0;
  lp_sys.A(m, n + 1) = 1.0;
  lp_sys.b.head(m) = sys.b;
  lp_sys.b(m) = 1.0;
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(n + 2);
  cost(n) = -1.0;
  const auto lp = linprog(cost, lp_sys);
  if (lp.status == LpStatus::Optimal && lp.x(n) > 0.0) {
    const Eigen::VectorXd x = (lp.x.head(n).array() + lp.x(n)).matrix();
    out = {true, NormalizerMethod::Lp, x, sys.relative_residual(x), ""};
    return out;
  }
  if (nn_res <= kResidualTol) {
    out = {true, NormalizerMethod::Nnls, nn, nn_res, "some normalizers are zero"};
    return out;
  }
  out.feasible = false;
  out.method = NormalizerMethod::None;
  out.message = "no nonnegative per-combination normalization exists";
  return out;
}

Eigen::MatrixXd combination_matrix(const MmsbmNormalizers& n, int num_cross_blocks) {
  const int k = num_cross_blocks;
  if (n.x.size() != k * (k + 1) / 2) throw InvalidArgument("normalizer vector has wrong length");
  Eigen::MatrixXd m(k, k);
  for (int u = 0; u < k; ++u)
    for (int v = u; v < k; ++v) m(u, v) = m(v, u) = n.x(tri(u, v, k));
  return m;
}

}  // namespace scbm
