#include "scbm/block_state.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace scbm {

namespace {

constexpr std::size_t kMaxTable = std::size_t{1} << 22;
const double kLn2 = std::log(2.0);

struct Counts {
  std::vector<double> n, er;
  Eigen::MatrixXd e;  // doubled diagonal
};

DlTerms terms_from_counts(const Counts& c, InferenceVariant variant, int k_max, double n_nodes, double n_edges,
                          double degree_const, const LogFactorial& lf) {
  DlTerms t;
  const int k = static_cast<int>(c.n.size());
  if (k > k_max) {
    t.partition_prior = std::numeric_limits<double>::infinity();
    return t;
  }
  for (int r = 0; r < k; ++r) {
    for (int s = r; s < k; ++s) {
      if (variant == InferenceVariant::Ndc) {
        const double pairs = r == s ? c.n[r] * (c.n[r] - 1) / 2 : c.n[r] * c.n[s];
        const double m = r == s ? c.e(r, r) / 2 : c.e(r, s);
        t.likelihood -= lf(m) + lf(pairs - m) - lf(pairs + 1);
      } else if (r == s) {
        const double m = c.e(r, r) / 2;
        t.likelihood -= m * kLn2 + lf(m);
      } else {
        t.likelihood -= lf(c.e(r, s));
      }
    }
  }
  if (variant == InferenceVariant::Dc) {
    t.likelihood -= degree_const;
    for (int r = 0; r < k; ++r) {
      t.likelihood += lf(c.er[r]);
      if (c.er[r] > 0) t.degree_prior += lf.log_binom(c.n[r] + c.er[r] - 1, c.er[r]);
    }
    const double pairs = double(k) * (k + 1) / 2;
    if (n_edges > 0) t.edge_prior = lf.log_binom(pairs + n_edges - 1, n_edges);
  }
  t.partition_prior = std::log(double(k_max)) + lf.log_binom(n_nodes - 1, k - 1) + lf(n_nodes) - lf(k);
  for (int r = 0; r < k; ++r) t.partition_prior -= lf(c.n[r]);
  return t;
}

double degree_constant(const InferenceGraph& g, const LogFactorial& lf) {
  double s = 0.0;
  for (auto k : g.degrees) s += lf(double(k));
  return s;
}

}  // namespace

std::string to_string(InferenceVariant v) { return v == InferenceVariant::Ndc ? "ndc" : "dc"; }

InferenceVariant parse_inference_variant(const std::string& s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (lower == "ndc") return InferenceVariant::Ndc;
  if (lower == "dc") return InferenceVariant::Dc;
  throw InvalidArgument("unknown inference variant '" + s + "' (expected ndc or dc)");
}

InferenceGraph InferenceGraph::from_graph(const Graph& g) {
  InferenceGraph out;
  out.n_nodes = g.num_nodes();
  out.adjacency.resize(out.n_nodes);
  out.degrees.assign(out.n_nodes, 0);
  for (const auto& p : g.pairs()) {
    if (p.u == p.v) {
      out.dropped_self_loops += p.count;
      continue;
    }
    out.collapsed_edges += p.count - 1;
    out.adjacency[p.u].push_back(p.v);
    out.adjacency[p.v].push_back(p.u);
    ++out.degrees[p.u];
    ++out.degrees[p.v];
    ++out.n_edges;
  }
  return out;
}

LogFactorial::LogFactorial(std::size_t table_size) {
  table_size = std::min(table_size, kMaxTable);
  table_.resize(table_size + 1);
  table_[0] = 0.0;
  for (std::size_t i = 1; i < table_.size(); ++i) table_[i] = table_[i - 1] + std::log(double(i));
}

double LogFactorial::slow(double x) { return std::lgamma(x + 1.0); }

int default_k_max(std::size_t n_nodes) { return std::max(1, static_cast<int>((n_nodes + 9) / 10)); }

DlTerms description_length_terms(const InferenceGraph& g, const Partition& p, InferenceVariant variant, int k_max) {
  if (p.size() != g.n_nodes)
    throw InvalidArgument("partition length " + std::to_string(p.size()) + " does not match graph size " +
                          std::to_string(g.n_nodes));
  if (k_max <= 0) k_max = default_k_max(g.n_nodes);
  const int k = p.num_blocks();
  Counts c{std::vector<double>(k, 0.0), std::vector<double>(k, 0.0), Eigen::MatrixXd::Zero(k, k)};
  for (std::size_t i = 0; i < p.size(); ++i) {
    c.n[p[i]] += 1;
    c.er[p[i]] += double(g.degrees[i]);
    for (NodeId j : g.adjacency[i]) c.e(p[i], p[j]) += 1;  // each edge seen from both ends
  }
  const double n = double(g.n_nodes);
  const LogFactorial lf(static_cast<std::size_t>(std::max(n * n / 2 + 2, n + 2.0 * g.n_edges + 2)));
  return terms_from_counts(c, variant, k_max, n, double(g.n_edges), degree_constant(g, lf), lf);
}

double description_length(const Graph& g, const Partition& p, InferenceVariant variant, int k_max) {
  return description_length_terms(InferenceGraph::from_graph(g), p, variant, k_max).total();
}

BlockState::BlockState(const InferenceGraph& g, InferenceVariant variant, int k_max, const Partition& init)
    : g_(&g), variant_(variant), k_max_(k_max > 0 ? k_max : default_k_max(g.n_nodes)) {
  if (init.size() != g.n_nodes) throw InvalidArgument("initial partition length does not match graph");
  if (init.num_blocks() > k_max_)
    throw InvalidArgument("initial partition has " + std::to_string(init.num_blocks()) + " blocks, k_max is " +
                          std::to_string(k_max_));
  const double n = double(g.n_nodes);
  lf_ = LogFactorial(static_cast<std::size_t>(std::max(n * n / 2 + 2, n + 2.0 * double(g.n_edges) + 2)));
  cap_ = static_cast<std::size_t>(k_max_) + 1;
  n_.assign(cap_, 0);
  er_.assign(cap_, 0);
  e_.assign(cap_ * cap_, 0);
  active_pos_.assign(cap_, -1);
  b_.assign(init.labels().begin(), init.labels().end());
  for (std::size_t i = 0; i < g.n_nodes; ++i) {
    ++n_[static_cast<std::size_t>(b_[i])];
    er_[static_cast<std::size_t>(b_[i])] += static_cast<long>(g.degrees[i]);
    for (NodeId j : g.adjacency[i]) e(b_[i], b_[j]) += 1;
  }
  for (int s = 0; s < static_cast<int>(cap_); ++s) {
    if (n_[static_cast<std::size_t>(s)] > 0) {
      active_pos_[static_cast<std::size_t>(s)] = static_cast<int>(active_.size());
      active_.push_back(s);
    }
  }
  for (int s = static_cast<int>(cap_) - 1; s >= 0; --s)
    if (n_[static_cast<std::size_t>(s)] == 0) free_.push_back(s);
  degree_const_ = degree_constant(g, lf_);
  dl_ = recompute_dl();
}

DlTerms BlockState::recompute_terms() const {
  const int k = num_blocks();
  Counts c{std::vector<double>(k), std::vector<double>(k), Eigen::MatrixXd(k, k)};
  for (int a = 0; a < k; ++a) {
    c.n[a] = n_[static_cast<std::size_t>(active_[a])];
    c.er[a] = double(er_[static_cast<std::size_t>(active_[a])]);
    for (int b = 0; b < k; ++b) c.e(a, b) = double(e(active_[a], active_[b]));
  }
  return terms_from_counts(c, variant_, k_max_, double(g_->n_nodes), double(g_->n_edges), degree_const_, lf_);
}

double BlockState::recompute_dl() const { return recompute_terms().total(); }

double BlockState::pair_term(int r, int s) const {
  const double nr = n_[static_cast<std::size_t>(r)], ns = n_[static_cast<std::size_t>(s)];
  if (nr == 0 || ns == 0) return 0.0;
  if (variant_ == InferenceVariant::Ndc) {
    const double pairs = r == s ? nr * (nr - 1) / 2 : nr * ns;
    const double m = r == s ? double(e(r, r)) / 2 : double(e(r, s));
    return -(lf_(m) + lf_(pairs - m) - lf_(pairs + 1));
  }
  if (r == s) {
    const double m = double(e(r, r)) / 2;
    return -(m * kLn2 + lf_(m));
  }
  return -lf_(double(e(r, s)));
}

double BlockState::block_term(int r) const {
  const double nr = n_[static_cast<std::size_t>(r)];
  if (nr == 0) return 0.0;
  double t = -lf_(nr);
  if (variant_ == InferenceVariant::Dc) {
    const double er = double(er_[static_cast<std::size_t>(r)]);
    t += lf_(er);
    if (er > 0) t += lf_.log_binom(nr + er - 1, er);
  }
  return t;
}

double BlockState::global_term(int k) const {
  const double n = double(g_->n_nodes);
  double t = lf_.log_binom(n - 1, k - 1) - lf_(k);
  if (variant_ == InferenceVariant::Dc && g_->n_edges > 0) {
    const double pairs = double(k) * (k + 1) / 2;
    t += lf_.log_binom(pairs + double(g_->n_edges) - 1, double(g_->n_edges));
  }
  return t;
}

// Terms touching slots r or s: pairs (r, t), (s, t) over all active slots plus both blocks.
double BlockState::local_terms(int r, int s) const {
  double t = block_term(r) + block_term(s);
  for (int a : union_scratch_) {
    t += pair_term(r, a);
    if (a != r) t += pair_term(s, a);
  }
  return t;
}

void BlockState::shift_edge(int r, int t, int delta) {
  if (r == t) {
    e(r, r) += 2 * delta;
  } else {
    e(r, t) += delta;
    e(t, r) += delta;
  }
}

double BlockState::move(NodeId i, int s) {
  const int r = b_[i];
  if (r == s) return 0.0;
  if (s < 0 || static_cast<std::size_t>(s) >= cap_) throw InvalidArgument("target slot out of range");

  union_scratch_ = active_;
  if (active_pos_[static_cast<std::size_t>(s)] < 0) {
    if (num_blocks() + (n_[static_cast<std::size_t>(r)] > 1 ? 1 : 0) > k_max_)
      throw InvalidArgument("move would exceed k_max = " + std::to_string(k_max_) + " blocks");
    union_scratch_.push_back(s);
  }
  const int k_before = num_blocks();
  const double before = local_terms(r, s);

  for (NodeId j : g_->adjacency[i]) {
    const int t = b_[j];
    shift_edge(r, t, -1);
    shift_edge(s, t, +1);
  }
  const auto ki = static_cast<long>(g_->degrees[i]);
  er_[static_cast<std::size_t>(r)] -= ki;
  er_[static_cast<std::size_t>(s)] += ki;
  --n_[static_cast<std::size_t>(r)];
  ++n_[static_cast<std::size_t>(s)];
  b_[i] = s;

  if (n_[static_cast<std::size_t>(s)] == 1) {
    free_.erase(std::find(free_.begin(), free_.end(), s));
    active_pos_[static_cast<std::size_t>(s)] = static_cast<int>(active_.size());
    active_.push_back(s);
  }
  if (n_[static_cast<std::size_t>(r)] == 0) {
    const int pos = active_pos_[static_cast<std::size_t>(r)];
    active_[static_cast<std::size_t>(pos)] = active_.back();
    active_pos_[static_cast<std::size_t>(active_.back())] = pos;
    active_.pop_back();
    active_pos_[static_cast<std::size_t>(r)] = -1;
    free_.push_back(r);
  }
  const double after = local_terms(r, s);
  const int k_after = num_blocks();
  double delta = after - before;
  if (k_after != k_before) delta += global_term(k_after) - global_term(k_before);
  dl_ += delta;
  return delta;
}

Partition BlockState::partition() const {
  return Partition(std::vector<Label>(b_.begin(), b_.end()));
}

}  // namespace scbm
