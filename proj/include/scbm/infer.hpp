#pragma once

// Posterior sampling over unlabeled partitions targeting exp(-Sigma).

#include <cstdint>
#include <string>
#include <vector>

#include "scbm/block_state.hpp"
#include "scbm/core.hpp"
#include "scbm/rng.hpp"

namespace scbm {

enum class InitMode {
  /// Every node in one block.
  SingleBlock,
  /// Uniform random labels over init_blocks blocks (capped at k_max).
  Random,
};

struct McmcConfig {
  std::size_t n_samples = 50;
  std::size_t burn_in_sweeps = 1000;
  std::size_t sweeps_between_samples = 10;
  /// Block cap; 0 selects ceil(N / 10).
  int k_max = 0;
  /// Relative weights of a sweep of N single-node proposals and of one merge-split proposal.
  double single_node_weight = 0.9;
  double merge_split_weight = 0.1;
  /// Restricted Gibbs scans before the final merge-split scan.
  int gibbs_scans = 3;
  InitMode init = InitMode::Random;
  int init_blocks = 8;
  std::uint64_t seed = 0;
};

struct PosteriorSample {
  Partition partition;
  double description_length = 0.0;
  InferenceVariant variant = InferenceVariant::Ndc;
  std::size_t sweep_index = 0;
};

struct ChainStats {
  std::size_t single_proposals = 0;
  std::size_t single_accepted = 0;
  std::size_t merge_split_proposals = 0;
  std::size_t merge_split_accepted = 0;
  /// Tracked DL after every sweep.
  std::vector<double> dl_trace;
  std::size_t dropped_self_loops = 0;
  std::size_t collapsed_edges = 0;
};

/// Metropolis-Hastings moves over a BlockState.
class PartitionSampler {
 public:
  PartitionSampler(BlockState& state, Rng& rng, int gibbs_scans = 3)
      : state_(state), rng_(rng), gibbs_scans_(gibbs_scans) {}

  /// Moves a uniform node to a uniform target among the K blocks plus one fresh
  /// block; accepts with exp(-dSigma) (K + 1) / (K' + 1). Returns true if accepted.
  bool single_node_step();

  /// Log Metropolis-Hastings ratio of moving node i to slot s (the state is unchanged).
  double log_acceptance(NodeId i, int s);

  /// Split of the block shared by two uniform nodes, or merge of their two
  /// blocks, with restricted Gibbs proposals. Returns true if accepted.
  bool merge_split_step();

 private:
  // Restricted Gibbs pass over members between slots a and b; accumulates log
  // probabilities of the realized (or, with forced, the given) assignment.
  double gibbs_pass(const std::vector<NodeId>& members, int a, int b, const std::vector<int>* forced);

  BlockState& state_;
  Rng& rng_;
  int gibbs_scans_;
};

/// Runs one chain on g (self-loops dropped, multi-edges collapsed) and returns
/// n_samples partitions spaced by sweeps_between_samples after burn-in.
std::vector<PosteriorSample> sample_posterior(const Graph& g, InferenceVariant variant, const McmcConfig& cfg,
                                              ChainStats* stats = nullptr);

/// Mean-field entropy: sum over nodes of the entropy of each node's label
/// after aligning every sample to the first by maximum overlap matching.
/// Labels left unmatched are numbered after the reference labels in order of
/// first appearance. Throws InvalidArgument for fewer than 2 samples.
double posterior_entropy(const std::vector<PosteriorSample>& samples);
double posterior_entropy(const std::vector<Partition>& partitions);

/// -<Sigma> + sign * H; sign = +1 is the variational bound.
double log_evidence(const std::vector<PosteriorSample>& samples, double entropy_sign = 1.0);

}  // namespace scbm
