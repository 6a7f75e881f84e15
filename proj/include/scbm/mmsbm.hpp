#pragma once

// Constrained mixed-membership normalizations. Each node's membership vector is
// split evenly over its two factor blocks, so a pair's active blocks fall in
// the same factor with probability 1/2 and only those draws produce edges.

#include <string>

#include <Eigen/Dense>

#include "scbm/core.hpp"
#include "scbm/numeric.hpp"

namespace scbm {

enum class NormalizerMethod { MinNorm, Nnls, Lp, None };

std::string to_string(NormalizerMethod m);

struct MmsbmNormalizers {
  bool feasible = false;
  NormalizerMethod method = NormalizerMethod::None;
  /// Per-pair: x over factor pairs, [x_aa, x_ab, x_bb, x_cc, x_cd, x_dd] for two
  /// 2-block factors. Per-combination: x over cross pairs u <= v, row-major.
  Eigen::VectorXd x;
  double residual = 0.0;
  std::string message;
};

/// theta1_rs = 1/4 x_rs theta1_rs + 1/(4 K2^2) sum_{r's'} x_r's' theta2_r's', and
/// symmetrically for factor 2; unknowns as in MmsbmNormalizers::x.
LinearSystem<double> mmsbm_per_pair_system(const BlockMatrix& theta1, const BlockMatrix& theta2);

/// theta1_rs = 1/(4 K2^2) sum_{r's'} x_{(r,r'),(s,s')} (theta1_rs + theta2_r's'),
/// and symmetrically for factor 2; unknowns over unordered cross pairs.
LinearSystem<double> mmsbm_per_combination_system(const BlockMatrix& theta1, const BlockMatrix& theta2);

/// Min-norm solution when nonnegative, else an LP vertex when one exists.
/// Infeasibility is reported in the result, not thrown.
MmsbmNormalizers mmsbm_normalizers_per_pair(const BlockMatrix& theta1, const BlockMatrix& theta2);

/// Escalates min-norm -> NNLS -> LP (maximizing the smallest component) until
/// every normalizer is positive. Throws InconsistentSystem on mismatched totals.
MmsbmNormalizers mmsbm_normalizers_per_combination(const BlockMatrix& theta1, const BlockMatrix& theta2);

/// Per-combination normalizers as a symmetric K x K matrix over cross-blocks.
Eigen::MatrixXd combination_matrix(const MmsbmNormalizers& n, int num_cross_blocks);

}  // namespace scbm
