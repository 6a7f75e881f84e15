#pragma once

// Graph, partition and block-matrix domain types.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scbm/error.hpp"

namespace scbm {

using NodeId = std::size_t;
using Label = int;

struct Edge {
  NodeId u;
  NodeId v;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// An unordered node pair together with how many parallel edges join it.
struct EdgeMultiplicity {
  NodeId u;  // u <= v
  NodeId v;
  std::size_t count;
  friend bool operator==(const EdgeMultiplicity&, const EdgeMultiplicity&) = default;
};

struct GraphMode {
  bool simple = true;
  bool allow_self_loops = false;
  friend bool operator==(const GraphMode&, const GraphMode&) = default;
};

/// Undirected graph on nodes [0, N). Immutable once built.
///
/// Pairs are stored normalized (u <= v), sorted, with a multiplicity per pair.
/// A self-loop contributes 2 to its node's degree.
class Graph {
 public:
  Graph() = default;

  /// Validates ids, duplicates (simple mode) and self-loops; throws InvalidArgument.
  static Graph from_edges(std::size_t n_nodes, std::span<const Edge> edges, GraphMode mode);

  std::size_t num_nodes() const noexcept { return n_nodes_; }
  /// Edge count with multiplicity.
  std::size_t num_edges() const noexcept { return n_edges_; }
  std::size_t num_self_loops() const noexcept { return n_loops_; }
  const GraphMode& mode() const noexcept { return mode_; }
  std::span<const EdgeMultiplicity> pairs() const noexcept { return pairs_; }
  /// Every edge once per multiplicity, in pair order.
  std::vector<Edge> edge_list() const;
  std::vector<std::size_t> degrees() const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::size_t n_nodes_ = 0;
  std::size_t n_edges_ = 0;
  std::size_t n_loops_ = 0;
  GraphMode mode_{};
  std::vector<EdgeMultiplicity> pairs_;
};

/// Node-to-block assignment with labels dense in [0, K).
///
/// Labels already dense are kept verbatim (block 0 keeps its meaning, e.g. the
/// core of a core-periphery split). Sparse labelings are compacted preserving
/// the order of label values.
class Partition {
 public:
  Partition() = default;
  explicit Partition(std::vector<Label> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  int num_blocks() const noexcept { return num_blocks_; }
  std::span<const Label> labels() const noexcept { return labels_; }
  Label operator[](std::size_t i) const { return labels_[i]; }
  std::vector<std::size_t> block_sizes() const;

  /// Relabeled by order of first appearance; equal iff partitions agree up to relabeling.
  Partition canonical() const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<Label> labels_;
  int num_blocks_ = 0;
};

struct ProbabilityTag {};
struct CountTag {};

/// Symmetric K x K matrix over block pairs; diagonal uses the doubled convention.
///
/// Tag distinguishes edge probabilities (BlockMatrix) from expected or realized
/// edge counts (EdgeCountMatrix) at the type level.
template <typename Tag, typename Scalar = double>
class SymmetricBlockMatrix {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  SymmetricBlockMatrix() = default;

  explicit SymmetricBlockMatrix(Matrix values, Scalar symmetry_tol = Scalar(1e-12))
      : values_(std::move(values)) {
    if (values_.rows() != values_.cols()) throw InvalidArgument("block matrix must be square");
    const Scalar scale = values_.size() ? values_.cwiseAbs().maxCoeff() : Scalar(0);
    for (Eigen::Index r = 0; r < dim(); ++r) {
      for (Eigen::Index s = 0; s < dim(); ++s) {
        if (!(values_(r, s) >= Scalar(0)) || !std::isfinite(double(values_(r, s))))
          throw InvalidArgument("block matrix entries must be finite and nonnegative");
        if (std::abs(values_(r, s) - values_(s, r)) > symmetry_tol * scale)
          throw InvalidArgument("block matrix must be symmetric");
      }
    }
    values_ = (values_ + values_.transpose()).eval() / Scalar(2);
  }

  Eigen::Index dim() const noexcept { return values_.rows(); }
  const Matrix& values() const noexcept { return values_; }
  Scalar operator()(Eigen::Index r, Eigen::Index s) const { return values_(r, s); }
  Scalar total() const { return values_.sum(); }

  friend bool operator==(const SymmetricBlockMatrix& a, const SymmetricBlockMatrix& b) {
    return a.values_ == b.values_;
  }

 private:
  Matrix values_;
};

using BlockMatrix = SymmetricBlockMatrix<ProbabilityTag>;
using EdgeCountMatrix = SymmetricBlockMatrix<CountTag>;

/// Row-major enumeration of cross-blocks over factor partitions.
///
/// With factor block counts (K1, K2) the cross-block of coordinates (r, r') has
/// index r * K2 + r', i.e. (a,c), (a,d), (b,c), (b,d) for two 2-block factors.
class CrossIndex {
 public:
  CrossIndex() = default;
  explicit CrossIndex(std::vector<int> factor_block_counts);

  int num_factors() const noexcept { return static_cast<int>(counts_.size()); }
  int num_cross_blocks() const noexcept { return total_; }
  const std::vector<int>& factor_block_counts() const noexcept { return counts_; }
  /// Block of cross-block u in factor p.
  int coordinate(int u, int factor) const;
  int index_of(std::span<const int> coords) const;

  friend bool operator==(const CrossIndex&, const CrossIndex&) = default;

 private:
  std::vector<int> counts_;
  int total_ = 0;
};

/// Realized counts: off-diagonal = edges between blocks, diagonal = twice the
/// within-block edges (a self-loop adds 2).
EdgeCountMatrix realized_block_matrix(const Graph& g, const Partition& p);

/// Factor-p partition implied by a cross partition: node i gets coordinate p of its cross-block.
Partition project_partition(const Partition& cross, const CrossIndex& index, int factor);

}  // namespace scbm
