#pragma once

// Network samplers for a cross-block specification.

#include <cstdint>
#include <string>
#include <vector>

#include "scbm/core.hpp"
#include "scbm/cross_block.hpp"
#include "scbm/mmsbm.hpp"
#include "scbm/power_law.hpp"

namespace scbm {

enum class GeneratorVariant { Canonical, MicrocanonicalDc, Mmsbm };

std::string to_string(GeneratorVariant v);
/// Accepts "canonical", "microcanonical_dc" (or "microcanonical"), "mmsbm".
GeneratorVariant parse_generator_variant(const std::string& s);

struct GeneratorConfig {
  GeneratorVariant variant = GeneratorVariant::Canonical;
  bool simple_mode = true;
  bool allow_self_loops = false;
  /// Power-law exponent of the target degrees (microcanonical only).
  double gamma = 3.0;
  int max_rejections = 100;
  std::uint64_t seed = 0;
};

struct PairShortfall {
  int u = 0;
  int v = 0;
  std::size_t requested = 0;
  std::size_t dropped = 0;
};

struct GenerationReport {
  std::vector<PairShortfall> shortfalls;  // only pairs that lost edges
  std::size_t requested_edges = 0;
  std::size_t shortfall_total = 0;
  /// ||B - round(B)||_F of the rounded targets (microcanonical only).
  double rounding_deviation = 0.0;
  /// Pairs whose MMSBM connection probability was capped at 1.
  std::size_t capped_pairs = 0;
  std::size_t total_pairs = 0;
  std::vector<std::string> warnings;
};

/// Nodes laid out block by block: cross-block u holds nu_u consecutive ids.
///
/// Throws InvalidArgument if some nu_u is not a nonnegative integer.
Partition planted_cross_partition(const CrossSpec& spec);

/// Independent Bernoulli(theta_uv) per pair i < j; with self-loops allowed, node
/// i gets a loop with probability theta_uu / 2.
Graph sample_canonical(const CrossSpec& spec, const Partition& memberships, const GeneratorConfig& cfg,
                       std::uint64_t seed);

struct RoundedCounts {
  EdgeCountMatrix counts;
  double deviation = 0.0;
};

/// Half-to-even rounding; the diagonal is rounded as a within count and re-doubled.
RoundedCounts round_edge_counts(const EdgeCountMatrix& b);

/// Places exactly B_int[u][v] edges per cross pair (B_int[u][u] / 2 within u),
/// drawing each endpoint inside its block proportionally to its target degree.
///
/// In simple mode repeated pairs are redrawn up to max_rejections times and then
/// dropped. Disallowed self-loops are redrawn in every mode. Throws
/// GenerationFailure when more than 1% of the requested edges are dropped.
Graph sample_microcanonical_dc(const EdgeCountMatrix& b_int, const Partition& memberships,
                               const DegreeSequence& degrees, const GeneratorConfig& cfg, std::uint64_t seed,
                               GenerationReport* report = nullptr);

/// Each node of a pair activates one of its two factor blocks uniformly; the pair
/// connects with probability min(1, x_uv theta_p) when both activate factor p.
///
/// Throws InvalidArgument for infeasible normalizers. Adds a warning to the
/// report when the cap at 1 applies to more than 0.1% of pairs.
Graph sample_mmsbm(const BlockMatrix& theta1, const BlockMatrix& theta2, const Partition& memberships1,
                   const Partition& memberships2, const MmsbmNormalizers& normalizers, std::uint64_t seed,
                   GenerationReport* report = nullptr);

struct GeneratedGraph {
  Graph graph;
  Partition cross;
  GenerationReport report;
  /// Target degrees (microcanonical only).
  DegreeSequence degrees;
};

/// Draws one graph from spec under cfg.variant with the planted layout.
/// Power-law degrees target the spec's mean degree rho * N.
GeneratedGraph generate_graph(const CrossSpec& spec, const GeneratorConfig& cfg, std::uint64_t seed);

}  // namespace scbm
