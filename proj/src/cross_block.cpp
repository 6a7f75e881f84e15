#include "scbm/cross_block.hpp"

#include <cmath>
#include <string>

#include "scbm/numeric.hpp"

namespace scbm {

namespace {

void check_square2(const BlockMatrix& t, const char* what) {
  if (t.dim() != 2) throw InvalidArgument(std::string(what) + " must be a 2x2 block matrix");
}

std::vector<int> block_counts(const std::vector<BlockMatrix>& thetas) {
  std::vector<int> k;
  for (const auto& t : thetas) {
    if (t.dim() < 1) throw InvalidArgument("factor block matrix is empty");
    k.push_back(static_cast<int>(t.dim()));
  }
  return k;
}

// Sum_{r,s} n_r n_s theta_rs, i.e. the entry sum of B_p (= 2E).
double factor_total(const BlockMatrix& theta, const Eigen::VectorXd& sizes) {
  return sizes.dot(theta.values() * sizes);
}

void fill_products(CrossSpec& spec) {
  const int k = spec.index.num_cross_blocks();
  Eigen::MatrixXd prod(k, k);
  for (int u = 0; u < k; ++u)
    for (int v = 0; v < k; ++v) prod(u, v) = spec.factor_product(u, v);
  spec.theta = BlockMatrix(spec.normalizers.cwiseProduct(prod));
}

CrossSpec equal_sized(const std::vector<BlockMatrix>& thetas, double rho, double n_nodes, const char* method) {
  if (thetas.size() < 2) throw InvalidArgument("cross-block construction needs at least two factors");
  if (!(rho > 0.0) || !(n_nodes > 0.0)) throw InvalidArgument("rho and N must be positive");
  CrossSpec spec;
  spec.index = CrossIndex(block_counts(thetas));
  spec.factors = thetas;
  spec.rho = rho;
  spec.method = method;
  const int k = spec.index.num_cross_blocks();
  spec.cross_sizes = Eigen::VectorXd::Constant(k, n_nodes / k);

  const double first = factor_total(thetas[0], spec.factor_sizes(0));
  for (std::size_t p = 1; p < thetas.size(); ++p) {
    const double tp = factor_total(thetas[p], spec.factor_sizes(static_cast<int>(p)));
    if (std::abs(tp - first) > 1e-12 * std::max(std::abs(first), std::abs(tp)))
      throw InvalidArgument("factor " + std::to_string(p + 1) + " implies " + std::to_string(tp / 2.0) +
                            " edges but factor 1 implies " + std::to_string(first / 2.0));
  }
  const double x = 1.0 / std::pow(rho, static_cast<double>(thetas.size() - 1));
  spec.normalizers = Eigen::MatrixXd::Constant(k, k, x);
  fill_products(spec);
  return spec;
}

}  // namespace

BlockMatrix make_theta_bicommunity(double mu, double beta) {
  if (!(mu > 0.0 && mu <= 0.5)) throw InvalidArgument("mu must lie in (0, 0.5], got " + std::to_string(mu));
  if (!(beta > 0.0)) throw InvalidArgument("beta must be positive");
  Eigen::Matrix2d m;
  m << 1.0 - mu, mu, mu, 1.0 - mu;
  return BlockMatrix(beta * m);
}

BlockMatrix make_theta_coreperiphery(double lambda, double beta) {
  if (!(lambda > 0.0 && lambda <= 0.5))
    throw InvalidArgument("lambda must lie in (0, 0.5], got " + std::to_string(lambda));
  if (!(beta > 0.0)) throw InvalidArgument("beta must be positive");
  Eigen::Matrix2d m;
  m << 1.0 - lambda, 0.5, 0.5, lambda;
  return BlockMatrix(beta * m);
}

double density(double n_nodes, double n_edges) { return 2.0 * n_edges / (n_nodes * n_nodes); }

double factor_beta(double n_edges, double block_size) { return n_edges / (block_size * block_size); }

Eigen::VectorXd CrossSpec::factor_sizes(int factor) const {
  const auto& counts = index.factor_block_counts();
  Eigen::VectorXd n = Eigen::VectorXd::Zero(counts.at(static_cast<std::size_t>(factor)));
  for (int u = 0; u < index.num_cross_blocks(); ++u) n(index.coordinate(u, factor)) += cross_sizes(u);
  return n;
}

double CrossSpec::factor_product(int u, int v) const {
  double prod = 1.0;
  for (int p = 0; p < num_factors(); ++p)
    prod *= factors[static_cast<std::size_t>(p)](index.coordinate(u, p), index.coordinate(v, p));
  return prod;
}

CrossSpec cross_block_matrix_equal(const BlockMatrix& theta1, const BlockMatrix& theta2, double rho,
                                   double n_nodes) {
  return equal_sized({theta1, theta2}, rho, n_nodes, "equal");
}

CrossSpec cross_block_matrix_multi(const std::vector<BlockMatrix>& thetas, double rho, double n_nodes) {
  return equal_sized(thetas, rho, n_nodes, "multi");
}

CrossSpec cross_block_matrix_general(const std::vector<BlockMatrix>& thetas, const Eigen::VectorXd& cross_sizes) {
  if (thetas.size() < 2) throw InvalidArgument("cross-block construction needs at least two factors");
  CrossSpec spec;
  spec.index = CrossIndex(block_counts(thetas));
  spec.factors = thetas;
  spec.method = "general";
  const int k = spec.index.num_cross_blocks();
  if (cross_sizes.size() != k)
    throw InvalidArgument("expected " + std::to_string(k) + " cross sizes, got " + std::to_string(cross_sizes.size()));
  for (int u = 0; u < k; ++u)
    if (!(cross_sizes(u) > 0.0)) throw InvalidArgument("cross sizes must be positive");
  spec.cross_sizes = cross_sizes;
  const double n = cross_sizes.sum();

  // Unknowns x_uv for u <= v, row-major upper triangle.
  Eigen::MatrixXi col(k, k);
  int n_unknowns = 0;
  for (int u = 0; u < k; ++u)
    for (int v = u; v < k; ++v) col(u, v) = col(v, u) = n_unknowns++;

  int n_rows = 0;
  for (int kp : spec.index.factor_block_counts()) n_rows += kp * (kp + 1) / 2;

  LinearSystem<double> sys{Eigen::MatrixXd::Zero(n_rows, n_unknowns), Eigen::VectorXd::Zero(n_rows)};
  int row = 0;
  for (int p = 0; p < spec.num_factors(); ++p) {
    const auto& theta = thetas[static_cast<std::size_t>(p)];
    const Eigen::VectorXd sizes = spec.factor_sizes(p);
    const int kp = static_cast<int>(theta.dim());
    for (int r = 0; r < kp; ++r) {
      for (int s = r; s < kp; ++s, ++row) {
        sys.b(row) = sizes(r) * sizes(s) * theta(r, s);
        for (int u = 0; u < k; ++u) {
          if (spec.index.coordinate(u, p) != r) continue;
          for (int v = 0; v < k; ++v) {
            if (spec.index.coordinate(v, p) != s) continue;
            sys.A(row, col(u, v)) += cross_sizes(u) * cross_sizes(v) * spec.factor_product(u, v);
          }
        }
      }
    }
  }
  const Eigen::VectorXd x = min_norm_solve(sys);

  spec.normalizers.resize(k, k);
  for (int u = 0; u < k; ++u) {
    for (int v = 0; v < k; ++v) {
      const double xv = x(col(u, v));
      if (xv < 0.0)
        throw InfeasibleConstruction("cross pair (" + std::to_string(u) + ", " + std::to_string(v) +
                                     ") gets negative edge probability (x = " + std::to_string(xv) + ")");
      spec.normalizers(u, v) = xv;
    }
  }
  fill_products(spec);
  // rho from the implied edge count: 2E = sum of B_1.
  spec.rho = factor_total(thetas[0], spec.factor_sizes(0)) / (n * n);
  return spec;
}

ResidualReport consistency_check(const CrossSpec& spec, const std::vector<BlockMatrix>& factors) {
  if (static_cast<int>(factors.size()) != spec.num_factors())
    throw InvalidArgument("consistency check: factor count mismatch");
  ResidualReport rep;
  const EdgeCountMatrix b = expected_counts(spec);
  const int k = spec.index.num_cross_blocks();
  for (int p = 0; p < spec.num_factors(); ++p) {
    const auto& theta = factors[static_cast<std::size_t>(p)];
    const Eigen::VectorXd sizes = spec.factor_sizes(p);
    for (int r = 0; r < theta.dim(); ++r) {
      for (int s = r; s < theta.dim(); ++s) {
        BlockSumResidual e{p, r, s, sizes(r) * sizes(s) * theta(r, s), 0.0};
        for (int u = 0; u < k; ++u) {
          if (spec.index.coordinate(u, p) != r) continue;
          for (int v = 0; v < k; ++v)
            if (spec.index.coordinate(v, p) == s) e.actual += b(u, v);
        }
        const double abs_err = std::abs(e.actual - e.expected);
        rep.max_abs = std::max(rep.max_abs, abs_err);
        if (e.expected != 0.0) rep.max_rel = std::max(rep.max_rel, abs_err / std::abs(e.expected));
        else if (abs_err > 0.0) rep.max_rel = std::max(rep.max_rel, abs_err);
        rep.entries.push_back(e);
      }
    }
  }
  return rep;
}

EdgeCountMatrix expected_counts(const CrossSpec& spec) {
  const auto& nu = spec.cross_sizes;
  return EdgeCountMatrix((nu * nu.transpose()).cwiseProduct(spec.theta.values()));
}

EdgeCountMatrix expected_factor_counts(const BlockMatrix& theta, const Eigen::VectorXd& sizes) {
  if (sizes.size() != theta.dim()) throw InvalidArgument("block size vector does not match block matrix");
  return EdgeCountMatrix((sizes * sizes.transpose()).cwiseProduct(theta.values()));
}

bool farkas_infeasible(const BlockMatrix& theta1, const BlockMatrix& theta2, double rho) {
  check_square2(theta1, "theta1");
  check_square2(theta2, "theta2");
  auto symmetric = [](const BlockMatrix& t) {
    return std::abs(t(0, 0) - t(1, 1)) <= 1e-12 * std::max(std::abs(t(0, 0)), std::abs(t(1, 1)));
  };
  if (!symmetric(theta1) || !symmetric(theta2))
    throw InvalidArgument("Farkas condition needs theta_aa = theta_bb and theta_cc = theta_dd; "
                          "check nonneg_feasible on the per-pair MMSBM system instead");
  return std::abs(theta1(0, 0) - theta1(0, 1)) + std::abs(theta2(0, 0) - theta2(0, 1)) > 2.0 * rho;
}

}  // namespace scbm
