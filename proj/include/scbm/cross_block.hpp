#pragma once

// Cross-block construction: one explicit cross-partition whose block
// connectivities reproduce every factor partition's expected block counts.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scbm/core.hpp"

namespace scbm {

/// beta * [[1-mu, mu], [mu, 1-mu]]; requires 0 < mu <= 0.5, beta > 0.
BlockMatrix make_theta_bicommunity(double mu, double beta);
/// beta * [[1-lambda, 1/2], [1/2, lambda]]; requires 0 < lambda <= 0.5, beta > 0.
BlockMatrix make_theta_coreperiphery(double lambda, double beta);

/// rho = 2E / N^2.
double density(double n_nodes, double n_edges);
/// beta = E / n^2 for factor blocks of size n; the entry sum of B_p is then 2E.
double factor_beta(double n_edges, double block_size);

struct CrossSpec {
  CrossIndex index;
  std::vector<BlockMatrix> factors;
  /// nu_u, summing to N.
  Eigen::VectorXd cross_sizes;
  BlockMatrix theta;
  double rho = 0.0;
  /// x_uv such that theta_uv = x_uv * prod_p theta_p; constant for equal sizes.
  Eigen::MatrixXd normalizers;
  /// "equal", "multi" or "general".
  std::string method;

  double num_nodes() const { return cross_sizes.sum(); }
  int num_factors() const { return index.num_factors(); }
  /// n_r of factor p, summed from cross sizes.
  Eigen::VectorXd factor_sizes(int factor) const;
  /// Product over factors of theta_p at the coordinates of (u, v).
  double factor_product(int u, int v) const;
};

/// Equal block sizes, two factors: theta_uv = theta1 * theta2 / rho, nu = N / (K1 K2).
///
/// Throws InvalidArgument if the factor entry sums differ by more than 1e-12 (relative).
CrossSpec cross_block_matrix_equal(const BlockMatrix& theta1, const BlockMatrix& theta2, double rho,
                                   double n_nodes);

/// Equal block sizes, P >= 2 factors: theta = rho^(1-P) * prod_p theta_p.
CrossSpec cross_block_matrix_multi(const std::vector<BlockMatrix>& thetas, double rho, double n_nodes);

/// Arbitrary cross sizes: per-pair normalizers x_uv from the min-norm solution of
/// the block-sum system, one equation per factor and factor block pair.
///
/// Throws InconsistentSystem when the factor totals disagree and
/// InfeasibleConstruction naming the first cross pair with a negative probability.
CrossSpec cross_block_matrix_general(const std::vector<BlockMatrix>& thetas, const Eigen::VectorXd& cross_sizes);

struct BlockSumResidual {
  int factor = 0;
  int r = 0;
  int s = 0;
  double expected = 0.0;  // n_r n_s theta_p[r][s]
  double actual = 0.0;    // sum over contributing cross pairs
};

struct ResidualReport {
  double max_abs = 0.0;
  double max_rel = 0.0;
  std::vector<BlockSumResidual> entries;
};

/// Compares every factor block sum of the cross-block matrix against n_r n_s theta_p.
ResidualReport consistency_check(const CrossSpec& spec, const std::vector<BlockMatrix>& factors);
inline ResidualReport consistency_check(const CrossSpec& spec) { return consistency_check(spec, spec.factors); }

/// B_uv = nu_u nu_v theta_uv (diagonal is the doubled within count).
EdgeCountMatrix expected_counts(const CrossSpec& spec);
/// Expected factor block counts n_r n_s theta_p[r][s].
EdgeCountMatrix expected_factor_counts(const BlockMatrix& theta, const Eigen::VectorXd& sizes);

/// |theta_aa - theta_ab| + |theta_cc - theta_cd| > 2 rho for symmetric 2x2 factors.
///
/// Throws InvalidArgument unless theta_aa = theta_bb and theta_cc = theta_dd;
/// use nonneg_feasible on mmsbm_per_pair_system for the general case.
bool farkas_infeasible(const BlockMatrix& theta1, const BlockMatrix& theta2, double rho);

}  // namespace scbm
