#pragma once

// Incremental SBM state for posterior sampling: block sizes, degree sums and
// the symmetric edge-count matrix over a fixed pool of block slots.

#include <cstdint>
#include <string>
#include <vector>

#include "scbm/core.hpp"

namespace scbm {

enum class InferenceVariant { Ndc, Dc };

std::string to_string(InferenceVariant v);
/// Accepts "ndc" or "dc" (case-insensitive).
InferenceVariant parse_inference_variant(const std::string& s);

/// Simple, loopless view of a graph used by inference.
struct InferenceGraph {
  std::size_t n_nodes = 0;
  std::size_t n_edges = 0;
  std::vector<std::vector<NodeId>> adjacency;
  std::vector<std::size_t> degrees;
  std::size_t dropped_self_loops = 0;
  /// Parallel edges beyond the first per pair.
  std::size_t collapsed_edges = 0;

  /// Drops self-loops and collapses multi-edges.
  static InferenceGraph from_graph(const Graph& g);
};

/// Additive pieces of the description length, in nats.
struct DlTerms {
  double likelihood = 0.0;
  double degree_prior = 0.0;  // DC only
  double edge_prior = 0.0;    // DC only
  double partition_prior = 0.0;
  double total() const { return likelihood + degree_prior + edge_prior + partition_prior; }
};

/// ln x! for integers, tabulated up to a bound and lgamma beyond it.
class LogFactorial {
 public:
  explicit LogFactorial(std::size_t table_size = 0);
  double operator()(double x) const {
    const auto i = static_cast<std::size_t>(x);
    return i < table_.size() ? table_[i] : slow(x);
  }
  /// ln C(a, b), 0 <= b <= a.
  double log_binom(double a, double b) const { return (*this)(a) - (*this)(b) - (*this)(a - b); }

 private:
  static double slow(double x);
  std::vector<double> table_;
};

/// Default block cap ceil(N / 10), at least 1.
int default_k_max(std::size_t n_nodes);

/// Description length of p under the chosen variant.
///
/// NDC: integrated Bernoulli likelihood. DC: microcanonical degree-corrected
/// likelihood with uniform degree and edge-count priors. Both include the
/// partition prior over unlabeled partitions with at most k_max blocks
/// (k_max <= 0 selects ceil(N / 10)); more blocks give +infinity.
DlTerms description_length_terms(const InferenceGraph& g, const Partition& p, InferenceVariant variant,
                                 int k_max = 0);
double description_length(const Graph& g, const Partition& p, InferenceVariant variant, int k_max = 0);

class BlockState {
 public:
  BlockState(const InferenceGraph& g, InferenceVariant variant, int k_max, const Partition& init);

  std::size_t num_nodes() const { return g_->n_nodes; }
  int num_blocks() const { return static_cast<int>(active_.size()); }
  int k_max() const { return k_max_; }
  int slot_of(NodeId i) const { return b_[i]; }
  int slot_size(int slot) const { return n_[static_cast<std::size_t>(slot)]; }
  const std::vector<int>& active_slots() const { return active_; }
  /// An empty slot, or -1 if the pool is exhausted.
  int fresh_slot() const { return free_.empty() ? -1 : free_.back(); }
  const InferenceGraph& graph() const { return *g_; }
  InferenceVariant variant() const { return variant_; }

  /// Tracked description length (accumulated deltas).
  double dl() const { return dl_; }
  /// Exact description length of the current state, recomputed from counts.
  double recompute_dl() const;
  DlTerms recompute_terms() const;

  /// Moves node i to slot s and returns the change in description length.
  double move(NodeId i, int s);

  /// Labels compacted in slot order.
  Partition partition() const;

 private:
  double pair_term(int r, int s) const;
  double block_term(int r) const;
  double global_term(int k) const;
  double local_terms(int r, int s) const;
  void shift_edge(int r, int t, int delta);
  long& e(int r, int s) { return e_[static_cast<std::size_t>(r) * cap_ + static_cast<std::size_t>(s)]; }
  long e(int r, int s) const { return e_[static_cast<std::size_t>(r) * cap_ + static_cast<std::size_t>(s)]; }

  const InferenceGraph* g_;
  InferenceVariant variant_;
  int k_max_;
  std::size_t cap_;
  LogFactorial lf_;
  std::vector<int> b_;
  std::vector<int> n_;
  std::vector<long> er_;
  std::vector<long> e_;
  std::vector<int> active_;
  std::vector<int> active_pos_;
  std::vector<int> free_;
  std::vector<int> union_scratch_;
  double degree_const_ = 0.0;
  double dl_ = 0.0;
};

}  // namespace scbm
