#include "scbm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "scbm/assignment.hpp"

namespace scbm {

namespace {

void check_lengths(const Partition& p, const Partition& q) {
  if (p.size() != q.size())
    throw InvalidArgument("partition lengths differ: " + std::to_string(p.size()) + " vs " + std::to_string(q.size()));
  if (p.size() == 0) throw InvalidArgument("partitions are empty");
}

double entropy(const Eigen::VectorXd& counts, double n) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < counts.size(); ++i)
    if (counts(i) > 0) h -= counts(i) / n * std::log(counts(i) / n);
  return h;
}

}  // namespace

Eigen::MatrixXd contingency(const Partition& p, const Partition& q) {
  check_lengths(p, q);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(p.num_blocks(), q.num_blocks());
  for (std::size_t i = 0; i < p.size(); ++i) c(p[i], q[i]) += 1.0;
  return c;
}

OverlapResult partition_overlap(const Partition& p, const Partition& q) {
  const Eigen::MatrixXd c = contingency(p, q);
  const auto assign = max_weight_assignment(c);
  OverlapResult out;
  for (int r = 0; r < c.rows(); ++r) {
    const int s = assign[static_cast<std::size_t>(r)];
    if (s < c.cols() && c(r, s) > 0) {
      out.matched_nodes += static_cast<std::size_t>(c(r, s));
      out.matching.emplace_back(r, s);
    }
  }
  out.omega = double(out.matched_nodes) / double(p.size());
  return out;
}

double variation_of_information(const Partition& p, const Partition& q) {
  const Eigen::MatrixXd c = contingency(p, q);
  const double n = double(p.size());
  const Eigen::VectorXd rp = c.rowwise().sum(), cq = c.colwise().sum().transpose();
  double mi = 0.0;
  for (Eigen::Index r = 0; r < c.rows(); ++r)
    for (Eigen::Index s = 0; s < c.cols(); ++s)
      if (c(r, s) > 0) mi += c(r, s) / n * std::log(c(r, s) * n / (rp(r) * cq(s)));
  return std::max(0.0, entropy(rp, n) + entropy(cq, n) - 2.0 * mi);
}

double normalized_degree_variance(const std::vector<std::size_t>& degrees) {
  if (degrees.size() < 2) throw InvalidArgument("degree variance needs at least two nodes");
  double mean = 0.0;
  for (auto k : degrees) mean += double(k);
  mean /= double(degrees.size());
  if (!(mean > 0.0)) throw InvalidArgument("degree variance undefined for an empty graph");
  double var = 0.0;
  for (auto k : degrees) var += (double(k) - mean) * (double(k) - mean);
  var /= double(degrees.size());
  return var / (mean * mean);
}

double normalized_degree_variance(const Graph& g) { return normalized_degree_variance(g.degrees()); }

double js_distance(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw InvalidArgument("PMFs must share a support");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0) d += 0.5 * p[i] * std::log2(p[i] / m);
    if (q[i] > 0) d += 0.5 * q[i] * std::log2(q[i] / m);
  }
  return std::sqrt(std::clamp(d, 0.0, 1.0));
}

double js_distance_degree_distributions(const Graph& g, const Partition& cp) {
  if (cp.size() != g.num_nodes()) throw InvalidArgument("partition length does not match graph");
  if (cp.num_blocks() != 2) throw InvalidArgument("core-periphery partition must have exactly 2 blocks");
  const auto deg = g.degrees();
  std::map<std::size_t, std::size_t> index;
  for (auto k : deg) index.emplace(k, 0);
  std::size_t next = 0;
  for (auto& [k, i] : index) i = next++;
  std::vector<double> pmf[2] = {std::vector<double>(next, 0.0), std::vector<double>(next, 0.0)};
  double count[2] = {0, 0};
  for (std::size_t i = 0; i < deg.size(); ++i) {
    pmf[cp[i]][index[deg[i]]] += 1.0;
    count[cp[i]] += 1.0;
  }
  for (int b = 0; b < 2; ++b)
    for (auto& x : pmf[b]) x /= count[b];
  return js_distance(pmf[0], pmf[1]);
}

double degree_threshold_cp_classification(const Graph& g, const Partition& planted_cp, double threshold_degree) {
  if (planted_cp.size() != g.num_nodes()) throw InvalidArgument("partition length does not match graph");
  if (planted_cp.num_blocks() != 2) throw InvalidArgument("core-periphery partition must have exactly 2 blocks");
  const auto deg = g.degrees();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < deg.size(); ++i) {
    const Label predicted = double(deg[i]) > threshold_degree ? 0 : 1;
    correct += predicted == planted_cp[i];
  }
  return double(correct) / double(deg.size());
}

double frobenius_deviation(const EdgeCountMatrix& planted, const EdgeCountMatrix& realized) {
  if (planted.dim() != realized.dim())
    throw InvalidArgument("count matrices differ in dimension: " + std::to_string(planted.dim()) + " vs " +
                          std::to_string(realized.dim()));
  return (planted.values() - realized.values()).norm();
}

}  // namespace scbm
