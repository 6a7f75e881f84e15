#pragma once

// Partition similarity and graph diagnostics.

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "scbm/core.hpp"

namespace scbm {

struct OverlapResult {
  double omega = 0.0;
  /// Matched (p label, q label) pairs with positive overlap.
  std::vector<std::pair<Label, Label>> matching;
  std::size_t matched_nodes = 0;
};

/// K_p x K_q counts of nodes per label pair.
Eigen::MatrixXd contingency(const Partition& p, const Partition& q);

/// Maximum fraction of nodes with identical labels over all label matchings.
OverlapResult partition_overlap(const Partition& p, const Partition& q);

/// H(p) + H(q) - 2 I(p; q), natural logarithms.
double variation_of_information(const Partition& p, const Partition& q);

/// Var(k) / mean(k)^2 of the degree sequence.
double normalized_degree_variance(const Graph& g);
double normalized_degree_variance(const std::vector<std::size_t>& degrees);

/// sqrt of the base-2 Jensen-Shannon divergence between the degree PMFs of the
/// two blocks of cp; lies in [0, 1].
double js_distance_degree_distributions(const Graph& g, const Partition& cp);
double js_distance(const std::vector<double>& p, const std::vector<double>& q);

/// Fraction of nodes whose planted block matches "core (block 0) iff k_i > threshold".
double degree_threshold_cp_classification(const Graph& g, const Partition& planted_cp, double threshold_degree);

/// ||B - M||_F.
double frobenius_deviation(const EdgeCountMatrix& planted, const EdgeCountMatrix& realized);

}  // namespace scbm
