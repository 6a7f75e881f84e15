#include "scbm/generate.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "scbm/rng.hpp"

namespace scbm {

namespace {

constexpr double kShortfallBudget = 0.01;
constexpr double kCapWarnFraction = 0.001;

std::vector<std::vector<NodeId>> members_by_block(const Partition& p, int k) {
  std::vector<std::vector<NodeId>> out(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < p.size(); ++i) out[static_cast<std::size_t>(p[i])].push_back(i);
  return out;
}

std::uint64_t pair_key(NodeId a, NodeId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

}  // namespace

std::string to_string(GeneratorVariant v) {
  switch (v) {
    case GeneratorVariant::Canonical: return "canonical";
    case GeneratorVariant::MicrocanonicalDc: return "microcanonical_dc";
    case GeneratorVariant::Mmsbm: return "mmsbm";
  }
  return "canonical";
}

GeneratorVariant parse_generator_variant(const std::string& s) {
  if (s == "canonical") return GeneratorVariant::Canonical;
  if (s == "microcanonical_dc" || s == "microcanonical") return GeneratorVariant::MicrocanonicalDc;
  if (s == "mmsbm") return GeneratorVariant::Mmsbm;
  throw InvalidArgument("unknown generator variant '" + s + "'");
}

Partition planted_cross_partition(const CrossSpec& spec) {
  std::vector<Label> labels;
  for (Eigen::Index u = 0; u < spec.cross_sizes.size(); ++u) {
    const double nu = spec.cross_sizes(u);
    if (!(nu >= 0.0) || nu != std::floor(nu))
      throw InvalidArgument("cross size " + std::to_string(nu) + " is not a whole number of nodes");
    labels.insert(labels.end(), static_cast<std::size_t>(nu), static_cast<Label>(u));
  }
  if (labels.empty()) throw InvalidArgument("cross sizes sum to zero");
  return Partition(std::move(labels));
}

Graph sample_canonical(const CrossSpec& spec, const Partition& memberships, const GeneratorConfig& cfg,
                       std::uint64_t seed) {
  const auto& theta = spec.theta;
  if (theta.values().maxCoeff() > 1.0)
    throw InvalidArgument("cross-block matrix has an edge probability above 1 (" +
                          std::to_string(theta.values().maxCoeff()) + ")");
  if (memberships.num_blocks() > theta.dim())
    throw InvalidArgument("memberships use more blocks than the cross-block matrix has");
  const auto sizes = memberships.block_sizes();
  for (std::size_t u = 0; u < sizes.size(); ++u)
    if (std::abs(double(sizes[u]) - spec.cross_sizes(static_cast<Eigen::Index>(u))) > 0.5)
      throw InvalidArgument("memberships do not match cross size of block " + std::to_string(u));

  Rng rng(seed);
  const std::size_t n = memberships.size();
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i) {
    const auto u = memberships[i];
    if (cfg.allow_self_loops && bernoulli(rng, 0.5 * theta(u, u))) edges.push_back({i, i});
    for (NodeId j = i + 1; j < n; ++j)
      if (bernoulli(rng, theta(u, memberships[j]))) edges.push_back({i, j});
  }
  return Graph::from_edges(n, edges, {true, cfg.allow_self_loops});
}

RoundedCounts round_edge_counts(const EdgeCountMatrix& b) {
  Eigen::MatrixXd r = b.values();
  for (Eigen::Index u = 0; u < r.rows(); ++u) {
    for (Eigen::Index v = 0; v < r.cols(); ++v)
      r(u, v) = u == v ? 2.0 * std::nearbyint(0.5 * r(u, v)) : std::nearbyint(r(u, v));
  }
  const double dev = (b.values() - r).norm();
  return {EdgeCountMatrix(std::move(r)), dev};
}

Graph sample_microcanonical_dc(const EdgeCountMatrix& b_int, const Partition& memberships,
                               const DegreeSequence& degrees, const GeneratorConfig& cfg, std::uint64_t seed,
                               GenerationReport* report) {
  const std::size_t n = memberships.size();
  if (degrees.degrees.size() != n) throw InvalidArgument("degree sequence length does not match memberships");
  if (memberships.num_blocks() > b_int.dim())
    throw InvalidArgument("memberships use more blocks than the count matrix has");
  const int k = static_cast<int>(b_int.dim());
  const auto members = members_by_block(memberships, k);

  std::vector<DiscreteSampler> samplers;
  for (const auto& m : members) {
    std::vector<double> w;
    for (NodeId i : m) w.push_back(double(degrees.degrees[i]));
    if (!w.empty() && std::all_of(w.begin(), w.end(), [](double x) { return x <= 0.0; }))
      std::fill(w.begin(), w.end(), 1.0);
    samplers.emplace_back(w);
  }

  GenerationReport rep;
  Rng rng(seed);
  std::vector<Edge> edges;
  std::unordered_set<std::uint64_t> used;
  for (int u = 0; u < k; ++u) {
    for (int v = u; v < k; ++v) {
      const double target = u == v ? 0.5 * b_int(u, u) : b_int(u, v);
      if (target != std::floor(target) || target < 0.0)
        throw InvalidArgument("edge count targets must be integral (round_edge_counts first)");
      const auto count = static_cast<std::size_t>(target);
      if (count == 0) continue;
      rep.requested_edges += count;
      const auto& mu = members[static_cast<std::size_t>(u)];
      const auto& mv = members[static_cast<std::size_t>(v)];
      PairShortfall sf{u, v, count, 0};
      if (mu.empty() || mv.empty()) {
        sf.dropped = count;
      } else {
        for (std::size_t e = 0; e < count; ++e) {
          bool placed = false;
          for (int attempt = 0; attempt <= cfg.max_rejections; ++attempt) {
            const NodeId i = mu[samplers[static_cast<std::size_t>(u)](rng)];
            const NodeId j = mv[samplers[static_cast<std::size_t>(v)](rng)];
            if (i == j && !cfg.allow_self_loops) continue;
            if (cfg.simple_mode && !used.insert(pair_key(i, j)).second) continue;
            edges.push_back({i, j});
            placed = true;
            break;
          }
          if (!placed) ++sf.dropped;
        }
      }
      if (sf.dropped > 0) {
        rep.shortfall_total += sf.dropped;
        rep.shortfalls.push_back(sf);
      }
    }
  }
  if (double(rep.shortfall_total) > kShortfallBudget * double(rep.requested_edges)) {
    const auto worst = std::max_element(rep.shortfalls.begin(), rep.shortfalls.end(),
                                        [](const auto& a, const auto& b) { return a.dropped < b.dropped; });
    throw GenerationFailure("dropped " + std::to_string(rep.shortfall_total) + " of " +
                            std::to_string(rep.requested_edges) + " edges (budget 1%); worst cross pair (" +
                            std::to_string(worst->u) + ", " + std::to_string(worst->v) + ") lost " +
                            std::to_string(worst->dropped) + " of " + std::to_string(worst->requested));
  }
  if (report) *report = std::move(rep);
  return Graph::from_edges(n, edges, {cfg.simple_mode, cfg.allow_self_loops});
}

Graph sample_mmsbm(const BlockMatrix& theta1, const BlockMatrix& theta2, const Partition& memberships1,
                   const Partition& memberships2, const MmsbmNormalizers& normalizers, std::uint64_t seed,
                   GenerationReport* report) {
  if (!normalizers.feasible) throw InvalidArgument("MMSBM sampling needs feasible normalizers");
  if (memberships1.size() != memberships2.size()) throw InvalidArgument("membership lengths differ");
  if (memberships1.num_blocks() > theta1.dim() || memberships2.num_blocks() > theta2.dim())
    throw InvalidArgument("memberships use more blocks than the factor matrices have");
  const int k2 = static_cast<int>(theta2.dim());
  const Eigen::MatrixXd x = combination_matrix(normalizers, static_cast<int>(theta1.dim()) * k2);

  const std::size_t n = memberships1.size();
  GenerationReport rep;
  Rng rng(seed);
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i) {
    const int ui = memberships1[i] * k2 + memberships2[i];
    for (NodeId j = i + 1; j < n; ++j) {
      const int uj = memberships1[j] * k2 + memberships2[j];
      const bool fi = bernoulli(rng, 0.5), fj = bernoulli(rng, 0.5);
      ++rep.total_pairs;
      if (fi != fj) continue;
      const double th = fi ? theta2(memberships2[i], memberships2[j]) : theta1(memberships1[i], memberships1[j]);
      double p = x(ui, uj) * th;
      if (p > 1.0) {
        ++rep.capped_pairs;
        p = 1.0;
      }
      if (bernoulli(rng, p)) edges.push_back({i, j});
    }
  }
  if (double(rep.capped_pairs) > kCapWarnFraction * double(rep.total_pairs))
    rep.warnings.push_back("connection probability capped at 1 for " + std::to_string(rep.capped_pairs) + " of " +
                           std::to_string(rep.total_pairs) + " pairs");
  if (report) *report = std::move(rep);
  return Graph::from_edges(n, edges, {true, false});
}

GeneratedGraph generate_graph(const CrossSpec& spec, const GeneratorConfig& cfg, std::uint64_t seed) {
  GeneratedGraph out;
  out.cross = planted_cross_partition(spec);
  switch (cfg.variant) {
    case GeneratorVariant::Canonical:
      out.graph = sample_canonical(spec, out.cross, cfg, seed);
      break;
    case GeneratorVariant::MicrocanonicalDc: {
      const auto rounded = round_edge_counts(expected_counts(spec));
      const double n = spec.num_nodes();
      const auto nn = static_cast<std::size_t>(n);
      out.degrees = sample_power_law_degrees(nn, cfg.gamma, spec.rho * n, 1, static_cast<int>(nn - 1),
                                             mix_seed({seed, 0x646567ULL}));
      out.graph = sample_microcanonical_dc(rounded.counts, out.cross, out.degrees, cfg, seed, &out.report);
      out.report.rounding_deviation = rounded.deviation;
      break;
    }
    case GeneratorVariant::Mmsbm: {
      if (spec.num_factors() != 2) throw InvalidArgument("MMSBM generation needs exactly two factors");
      const auto norm = mmsbm_normalizers_per_combination(spec.factors[0], spec.factors[1]);
      out.graph = sample_mmsbm(spec.factors[0], spec.factors[1], project_partition(out.cross, spec.index, 0),
                               project_partition(out.cross, spec.index, 1), norm, seed, &out.report);
      break;
    }
  }
  return out;
}

}  // namespace scbm
