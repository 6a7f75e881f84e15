#include "scbm/infer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "scbm/metrics.hpp"

namespace scbm {

namespace {

// log(1 + e^x)
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

bool accept(Rng& rng, double log_a) { return log_a >= 0.0 || uniform01(rng) < std::exp(log_a); }

std::vector<NodeId> members_of(const BlockState& s, int a, int b, NodeId skip1, NodeId skip2) {
  std::vector<NodeId> out;
  for (NodeId k = 0; k < s.num_nodes(); ++k) {
    if (k == skip1 || k == skip2) continue;
    const int x = s.slot_of(k);
    if (x == a || x == b) out.push_back(k);
  }
  return out;
}

}  // namespace

double PartitionSampler::log_acceptance(NodeId i, int s) {
  const int r = state_.slot_of(i);
  if (r == s) return 0.0;
  const int k = state_.num_blocks();
  const bool fresh = state_.slot_size(s) == 0;
  const bool vacates = state_.slot_size(r) == 1;
  const int k_after = k + (fresh ? 1 : 0) - (vacates ? 1 : 0);
  if (k_after > state_.k_max()) return -std::numeric_limits<double>::infinity();
  const double delta = state_.move(i, s);
  state_.move(i, r);
  return -delta + std::log(double(k + 1)) - std::log(double(k_after + 1));
}

bool PartitionSampler::single_node_step() {
  const std::size_t n = state_.num_nodes();
  const NodeId i = uniform_index(rng_, n);
  const int k = state_.num_blocks();
  const auto pick = static_cast<int>(uniform_index(rng_, static_cast<std::uint64_t>(k + 1)));
  const int s = pick < k ? state_.active_slots()[static_cast<std::size_t>(pick)] : state_.fresh_slot();
  const int r = state_.slot_of(i);
  if (s < 0 || s == r) return false;
  const bool fresh = pick == k;
  const bool vacates = state_.slot_size(r) == 1;
  if (fresh && vacates) return false;  // same partition
  const int k_after = k + (fresh ? 1 : 0) - (vacates ? 1 : 0);
  if (k_after > state_.k_max()) return false;

  const double delta = state_.move(i, s);
  const double log_a = -delta + std::log(double(k + 1)) - std::log(double(k_after + 1));
  if (accept(rng_, log_a)) return true;
  state_.move(i, r);
  return false;
}

double PartitionSampler::gibbs_pass(const std::vector<NodeId>& members, int a, int b, const std::vector<int>* forced) {
  double log_q = 0.0;
  for (std::size_t idx = 0; idx < members.size(); ++idx) {
    const NodeId k = members[idx];
    const int x = state_.slot_of(k);
    const int y = x == a ? b : a;
    const double d = state_.move(k, y);  // Sigma(y) - Sigma(x)
    const double log_py = -softplus(d), log_px = -softplus(-d);
    int target;
    if (forced) {
      target = (*forced)[idx];
    } else {
      target = uniform01(rng_) < std::exp(log_py) ? y : x;
    }
    if (target == x) state_.move(k, x);
    log_q += target == y ? log_py : log_px;
  }
  return log_q;
}

bool PartitionSampler::merge_split_step() {
  const std::size_t n = state_.num_nodes();
  if (n < 2) return false;
  const NodeId i = uniform_index(rng_, n);
  NodeId j = uniform_index(rng_, n - 1);
  if (j >= i) ++j;
  const int a = state_.slot_of(i), b = state_.slot_of(j);
  const double dl0 = state_.dl();

  if (a == b) {
    if (state_.num_blocks() + 1 > state_.k_max()) return false;
    const auto members = members_of(state_, a, a, i, j);
    const int c = state_.fresh_slot();
    state_.move(j, c);
    for (NodeId k : members)
      if (bernoulli(rng_, 0.5)) state_.move(k, c);
    for (int t = 0; t < gibbs_scans_; ++t) gibbs_pass(members, a, c, nullptr);
    const double log_q = gibbs_pass(members, a, c, nullptr);
    const double log_a = -(state_.dl() - dl0) - log_q;
    if (accept(rng_, log_a)) return true;
    for (NodeId k : members)
      if (state_.slot_of(k) == c) state_.move(k, a);
    state_.move(j, a);
    return false;
  }

  // Merge: probability of the reverse split (restricted Gibbs reaching the
  // current split from a random launch), then merge b into a.
  const auto members = members_of(state_, a, b, i, j);
  std::vector<int> orig(members.size());
  for (std::size_t idx = 0; idx < members.size(); ++idx) orig[idx] = state_.slot_of(members[idx]);
  for (NodeId k : members) state_.move(k, bernoulli(rng_, 0.5) ? a : b);
  for (int t = 0; t < gibbs_scans_; ++t) gibbs_pass(members, a, b, nullptr);
  const double log_q = gibbs_pass(members, a, b, &orig);
  const double dl_split = state_.dl();
  std::vector<NodeId> moved;
  for (std::size_t idx = 0; idx < members.size(); ++idx)
    if (orig[idx] == b) moved.push_back(members[idx]);
  moved.push_back(j);
  for (NodeId k : moved) state_.move(k, a);
  const double log_a = -(state_.dl() - dl_split) + log_q;
  if (accept(rng_, log_a)) return true;
  for (NodeId k : moved) state_.move(k, b);
  (void)dl0;
  return false;
}

std::vector<PosteriorSample> sample_posterior(const Graph& g, InferenceVariant variant, const McmcConfig& cfg,
                                              ChainStats* stats) {
  if (g.num_nodes() == 0) throw InvalidArgument("cannot sample partitions of an empty graph");
  if (cfg.n_samples < 1) throw InvalidArgument("n_samples must be >= 1");
  if (cfg.sweeps_between_samples < 1) throw InvalidArgument("sweeps_between_samples must be >= 1");
  if (cfg.k_max < 0) throw InvalidArgument("k_max must be >= 1 (or 0 for the default)");
  if (!(cfg.single_node_weight >= 0 && cfg.merge_split_weight >= 0 &&
        cfg.single_node_weight + cfg.merge_split_weight > 0))
    throw InvalidArgument("move weights must be nonnegative and not both zero");

  const auto ig = InferenceGraph::from_graph(g);
  const std::size_t n = ig.n_nodes;
  const int k_max = cfg.k_max > 0 ? cfg.k_max : default_k_max(n);
  Rng rng(cfg.seed);

  std::vector<Label> init(n, 0);
  if (cfg.init == InitMode::Random) {
    const auto k0 = static_cast<std::uint64_t>(std::clamp(cfg.init_blocks, 1, std::min(k_max, static_cast<int>(n))));
    for (auto& l : init) l = static_cast<Label>(uniform_index(rng, k0));
  }
  BlockState state(ig, variant, k_max, Partition(init));
  PartitionSampler sampler(state, rng, cfg.gibbs_scans);

  ChainStats st;
  st.dropped_self_loops = ig.dropped_self_loops;
  st.collapsed_edges = ig.collapsed_edges;
  std::vector<PosteriorSample> out;
  const std::size_t total = cfg.burn_in_sweeps + cfg.n_samples * cfg.sweeps_between_samples;
  const double wtot = cfg.single_node_weight + cfg.merge_split_weight;
  for (std::size_t t = 1; t <= total; ++t) {
    if (uniform01(rng) * wtot < cfg.merge_split_weight) {
      ++st.merge_split_proposals;
      st.merge_split_accepted += sampler.merge_split_step();
    } else {
      for (std::size_t step = 0; step < n; ++step) {
        ++st.single_proposals;
        st.single_accepted += sampler.single_node_step();
      }
    }
    if (stats) st.dl_trace.push_back(state.dl());
    if (t > cfg.burn_in_sweeps && (t - cfg.burn_in_sweeps) % cfg.sweeps_between_samples == 0)
      out.push_back({state.partition(), state.recompute_dl(), variant, t});
  }
  if (stats) *stats = std::move(st);
  return out;
}

double posterior_entropy(const std::vector<Partition>& partitions) {
  if (partitions.size() < 2) throw InvalidArgument("posterior entropy needs at least two samples");
  const Partition& ref = partitions.front();
  const std::size_t n = ref.size();
  std::vector<std::map<Label, std::size_t>> marginals(n);
  for (const auto& p : partitions) {
    if (p.size() != n) throw InvalidArgument("posterior samples differ in length");
    std::vector<Label> map(static_cast<std::size_t>(p.num_blocks()), -1);
    for (const auto& [r, s] : partition_overlap(ref, p).matching) map[static_cast<std::size_t>(s)] = r;
    Label next = ref.num_blocks();
    for (std::size_t i = 0; i < n; ++i) {
      auto& m = map[static_cast<std::size_t>(p[i])];
      if (m < 0) m = next++;
      ++marginals[i][m];
    }
  }
  const double s = double(partitions.size());
  double h = 0.0;
  for (const auto& m : marginals)
    for (const auto& [label, count] : m) h -= double(count) / s * std::log(double(count) / s);
  return h;
}

double posterior_entropy(const std::vector<PosteriorSample>& samples) {
  std::vector<Partition> parts;
  parts.reserve(samples.size());
  for (const auto& s : samples) parts.push_back(s.partition);
  return posterior_entropy(parts);
}

double log_evidence(const std::vector<PosteriorSample>& samples, double entropy_sign) {
  if (samples.empty()) throw InvalidArgument("log evidence needs at least one sample");
  double mean = 0.0;
  for (const auto& s : samples) mean += s.description_length;
  mean /= double(samples.size());
  const double h = samples.size() >= 2 ? posterior_entropy(samples) : 0.0;
  return -mean + entropy_sign * h;
}

}  // namespace scbm
