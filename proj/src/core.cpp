#include "scbm/core.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

namespace scbm {

Graph Graph::from_edges(std::size_t n_nodes, std::span<const Edge> edges, GraphMode mode) {
  if (n_nodes == 0) throw InvalidArgument("graph needs at least one node");
  std::vector<Edge> normalized;
  normalized.reserve(edges.size());
  for (const auto& e : edges) {
    if (e.u >= n_nodes || e.v >= n_nodes)
      throw InvalidArgument("node id out of range: (" + std::to_string(e.u) + ", " +
                            std::to_string(e.v) + ")");
    if (e.u == e.v && !mode.allow_self_loops)
      throw InvalidArgument("self-loop at node " + std::to_string(e.u) + " not allowed");
    normalized.push_back({std::min(e.u, e.v), std::max(e.u, e.v)});
  }
  std::sort(normalized.begin(), normalized.end(), [](const Edge& a, const Edge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });

  Graph g;
  g.n_nodes_ = n_nodes;
  g.mode_ = mode;
  for (const auto& e : normalized) {
    if (!g.pairs_.empty() && g.pairs_.back().u == e.u && g.pairs_.back().v == e.v) {
      if (mode.simple)
        throw InvalidArgument("duplicate pair (" + std::to_string(e.u) + ", " +
                              std::to_string(e.v) + ") in simple mode");
      ++g.pairs_.back().count;
    } else {
      g.pairs_.push_back({e.u, e.v, 1});
    }
    ++g.n_edges_;
    if (e.u == e.v) ++g.n_loops_;
  }
  return g;
}

std::vector<Edge> Graph::edge_list() const {
  std::vector<Edge> out;
  out.reserve(n_edges_);
  for (const auto& p : pairs_)
    for (std::size_t k = 0; k < p.count; ++k) out.push_back({p.u, p.v});
  return out;
}

std::vector<std::size_t> Graph::degrees() const {
  std::vector<std::size_t> deg(n_nodes_, 0);
  for (const auto& p : pairs_) {
    deg[p.u] += p.count;
    deg[p.v] += p.count;
  }
  return deg;
}

Partition::Partition(std::vector<Label> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) return;
  const auto [lo, hi] = std::minmax_element(labels_.begin(), labels_.end());
  if (*lo < 0) throw InvalidArgument("partition labels must be nonnegative");
  std::vector<char> seen(static_cast<std::size_t>(*hi) + 1, 0);
  for (Label l : labels_) seen[static_cast<std::size_t>(l)] = 1;
  std::vector<Label> rank(seen.size(), -1);
  Label next = 0;
  for (std::size_t l = 0; l < seen.size(); ++l)
    if (seen[l]) rank[l] = next++;
  num_blocks_ = next;
  if (static_cast<std::size_t>(next) != seen.size())
    for (auto& l : labels_) l = rank[static_cast<std::size_t>(l)];
}

std::vector<std::size_t> Partition::block_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(num_blocks_), 0);
  for (Label l : labels_) ++sizes[static_cast<std::size_t>(l)];
  return sizes;
}

Partition Partition::canonical() const {
  std::vector<Label> map(static_cast<std::size_t>(num_blocks_), -1);
  std::vector<Label> out(labels_.size());
  Label next = 0;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    auto& m = map[static_cast<std::size_t>(labels_[i])];
    if (m < 0) m = next++;
    out[i] = m;
  }
  return Partition(std::move(out));
}

CrossIndex::CrossIndex(std::vector<int> factor_block_counts) : counts_(std::move(factor_block_counts)) {
  if (counts_.empty()) throw InvalidArgument("cross index needs at least one factor");
  total_ = 1;
  for (int k : counts_) {
    if (k < 1) throw InvalidArgument("factor block counts must be positive");
    total_ *= k;
  }
}

int CrossIndex::coordinate(int u, int factor) const {
  if (u < 0 || u >= total_) throw InvalidArgument("cross-block " + std::to_string(u) + " not in index");
  if (factor < 0 || factor >= num_factors()) throw InvalidArgument("factor out of range");
  for (int p = num_factors() - 1; p > factor; --p) u /= counts_[static_cast<std::size_t>(p)];
  return u % counts_[static_cast<std::size_t>(factor)];
}

int CrossIndex::index_of(std::span<const int> coords) const {
  if (coords.size() != counts_.size()) throw InvalidArgument("coordinate arity mismatch");
  int u = 0;
  for (std::size_t p = 0; p < coords.size(); ++p) {
    if (coords[p] < 0 || coords[p] >= counts_[p]) throw InvalidArgument("coordinate out of range");
    u = u * counts_[p] + coords[p];
  }
  return u;
}

EdgeCountMatrix realized_block_matrix(const Graph& g, const Partition& p) {
  if (p.size() != g.num_nodes())
    throw InvalidArgument("partition length " + std::to_string(p.size()) +
                          " does not match graph size " + std::to_string(g.num_nodes()));
  const auto k = static_cast<Eigen::Index>(p.num_blocks());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
  for (const auto& e : g.pairs()) {
    const auto r = p[e.u];
    const auto s = p[e.v];
    const auto c = static_cast<double>(e.count);
    if (r == s) {
      m(r, r) += 2.0 * c;
    } else {
      m(r, s) += c;
      m(s, r) += c;
    }
  }
  return EdgeCountMatrix(std::move(m));
}

Partition project_partition(const Partition& cross, const CrossIndex& index, int factor) {
  std::vector<Label> out(cross.size());
  for (std::size_t i = 0; i < cross.size(); ++i) {
    if (cross[i] >= index.num_cross_blocks())
      throw InvalidArgument("cross label " + std::to_string(cross[i]) + " has no index entry");
    out[i] = index.coordinate(cross[i], factor);
  }
  return Partition(std::move(out));
}

}  // namespace scbm
