// Prints one PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "scbm/block_state.hpp"
#include "scbm/cross_block.hpp"
#include "scbm/generate.hpp"
#include "scbm/infer.hpp"
#include "scbm/metrics.hpp"
#include "scbm/mmsbm.hpp"
#include "scbm/numeric.hpp"
#include "scbm/rng.hpp"
#include "scbm/sweep.hpp"

using namespace scbm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

char buf[512];

// Cells evaluated by the grid criteria, rechecked by the monotonicity criterion.
std::vector<CellResult> evaluated;

CellResult cell_at(double lambda, double mu, const SweepConfig& cfg) {
  evaluated.push_back(run_cell(lambda, mu, 10, GeneratorVariant::Canonical, cfg));
  return evaluated.back();
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

CrossSpec spec_at(double mu, double lambda, double c) {
  const double e = c * 400 / 2, beta = factor_beta(e, 200);
  return cross_block_matrix_equal(make_theta_bicommunity(mu, beta), make_theta_coreperiphery(lambda, beta),
                                  density(400, e), 400);
}

// 1. Every factor block sum over the 50x50 grid at three densities.
Outcome construction_exactness() {
  double worst = 0.0;
  for (double c : {5.0, 10.0, 20.0})
    for (int i = 1; i <= 50; ++i)
      for (int j = 1; j <= 50; ++j) worst = std::max(worst, consistency_check(spec_at(i / 100.0, j / 100.0, c)).max_rel);
  return {worst <= 1e-12, fmt("7500 cells, worst relative block-sum error %.3g", worst)};
}

// 2. Hand values at mu = lambda = 0.1, c = 10.
Outcome reference_values() {
  const auto spec = spec_at(0.1, 0.1, 10);
  const auto rep = consistency_check(spec);
  // entries: factor 1 (a,a) (a,b) (b,b), factor 2 (c,c) (c,d) (d,d); within counts halved
  const double want[6] = {900, 200, 900, 900, 1000, 100};
  double worst = std::abs(spec.theta(0, 0) - 0.081) / 0.081;
  if (rep.entries.size() != 6) return {false, "unexpected residual report shape"};
  for (int i = 0; i < 6; ++i) {
    const auto& e = rep.entries[static_cast<std::size_t>(i)];
    const double count = e.r == e.s ? e.actual / 2 : e.actual;
    worst = std::max(worst, std::abs(count - want[i]) / want[i]);
  }
  return {worst <= 1e-12, fmt("theta[(a,c)][(a,c)] = %.17g, worst relative error %.3g", spec.theta(0, 0), worst)};
}

// 3. Random two-factor instances with arbitrary cross sizes.
Outcome general_solver() {
  Rng rng(2024);
  int valid = 0, drawn = 0;
  double worst = 0.0;
  while (valid < 100 && drawn < 10000) {
    ++drawn;
    Eigen::Vector4d nu;
    for (int u = 0; u < 4; ++u) nu(u) = double(20 + uniform_index(rng, 181));
    Eigen::Matrix2d m1, m2;
    const double a = uniform01(rng), b = uniform01(rng), d = uniform01(rng);
    const double e = uniform01(rng), f = uniform01(rng), g = uniform01(rng);
    m1 << a, b, b, d;
    m2 << e, f, f, g;
    const BlockMatrix t1(m1 * 0.05);
    BlockMatrix t2(m2 * 0.05);
    CrossSpec probe;
    probe.index = CrossIndex({2, 2});
    probe.cross_sizes = nu;
    // rescale theta2 so both factors imply the same edge total
    const double tot1 = expected_factor_counts(t1, probe.factor_sizes(0)).total();
    const double tot2 = expected_factor_counts(t2, probe.factor_sizes(1)).total();
    t2 = BlockMatrix(t2.values() * (tot1 / tot2));
    try {
      const auto spec = cross_block_matrix_general({t1, t2}, nu);
      if (spec.theta.values().maxCoeff() > 1.0) continue;
      worst = std::max(worst, consistency_check(spec).max_rel);
      ++valid;
    } catch (const InfeasibleConstruction&) {
    }
  }
  // equal sizes against the 1/rho construction
  double embed = 0.0;
  for (int t = 0; t < 100; ++t) {
    const double mu = 0.01 + 0.49 * uniform01(rng), lambda = 0.01 + 0.49 * uniform01(rng);
    const auto eq = spec_at(mu, lambda, 10);
    const auto gen = cross_block_matrix_general(eq.factors, Eigen::Vector4d::Constant(100.0));
    const auto re = consistency_check(eq), rg = consistency_check(gen);
    for (std::size_t i = 0; i < re.entries.size(); ++i)
      embed = std::max(embed, std::abs(re.entries[i].actual - rg.entries[i].actual) / re.entries[i].actual);
  }
  const bool ok = valid == 100 && worst <= 1e-9 && embed <= 1e-12;
  return {ok, fmt("%d valid of %d drawn, worst residual %.3g; equal-size embedding error %.3g", valid, drawn, worst,
                  embed)};
}

// 4. Closed-form predicate against the LP on the symmetric grid.
Outcome farkas_iff() {
  const double beta = 0.05, rho = 0.025;
  int agree = 0, infeasible = 0;
  auto sym2 = [](double diag, double off) {
    Eigen::Matrix2d m;
    m << diag, off, off, diag;
    return BlockMatrix(m);
  };
  for (int i = 1; i <= 50; ++i) {
    for (int j = 1; j <= 50; ++j) {
      const auto t1 = sym2(beta * (1 - i / 51.0), beta * i / 51.0);
      const auto t2 = sym2(beta * (1 - j / 51.0), beta * j / 51.0);
      const bool f = farkas_infeasible(t1, t2, rho);
      infeasible += f;
      agree += f == !nonneg_feasible(mmsbm_per_pair_system(t1, t2));
    }
  }
  return {agree == 2500, fmt("%d/2500 cells agree (%d infeasible)", agree, infeasible)};
}

double brute_overlap(const Partition& p, const Partition& q) {
  const Eigen::MatrixXd c = contingency(p, q);
  const Eigen::MatrixXd m = c.rows() > c.cols() ? Eigen::MatrixXd(c.transpose()) : c;
  std::vector<int> cols(static_cast<std::size_t>(m.cols()));
  std::iota(cols.begin(), cols.end(), 0);
  double best = 0.0;
  do {
    double s = 0.0;
    for (int r = 0; r < m.rows(); ++r) s += m(r, cols[static_cast<std::size_t>(r)]);
    best = std::max(best, s);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best / double(p.size());
}

// 5. Overlap against exhaustive bijections.
Outcome overlap_oracle() {
  Rng rng(55);
  int equal = 0;
  auto draw = [&](std::size_t n, int k) {
    std::vector<Label> l(n);
    for (auto& x : l) x = static_cast<Label>(uniform_index(rng, static_cast<std::uint64_t>(k)));
    return Partition(l);
  };
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + uniform_index(rng, 10);
    const auto p = draw(n, 1 + int(uniform_index(rng, 3)));
    const auto q = draw(n, 1 + int(uniform_index(rng, 3)));
    equal += partition_overlap(p, q).omega == brute_overlap(p, q);
  }
  return {equal == 200, fmt("%d/200 pairs equal", equal)};
}

// 6. Canonical means within 3 binomial SE; microcanonical multigraph exact.
Outcome sampler_statistics() {
  const auto spec = spec_at(0.1, 0.1, 10);
  const auto cross = planted_cross_partition(spec);
  GeneratorConfig cfg;
  cfg.allow_self_loops = true;
  const int seeds = 100;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(4, 4);
  for (int s = 0; s < seeds; ++s) sum += realized_block_matrix(sample_canonical(spec, cross, cfg, s), cross).values();
  const auto b = expected_counts(spec);
  int within = 0;
  double worst_z = 0.0;
  for (int u = 0; u < 4; ++u) {
    for (int v = u; v < 4; ++v) {
      const double nu = spec.cross_sizes(u), th = spec.theta(u, v);
      // the diagonal holds twice the within count: pairs plus loops at theta / 2
      const double var = u == v ? 4 * (nu * (nu - 1) / 2 * th * (1 - th) + nu * th / 2 * (1 - th / 2))
                                : nu * spec.cross_sizes(v) * th * (1 - th);
      const double z = std::abs(sum(u, v) / seeds - b(u, v)) / std::sqrt(var / seeds);
      worst_z = std::max(worst_z, z);
      within += z <= 3.0;
    }
  }
  const auto rounded = round_edge_counts(b).counts;
  GeneratorConfig mc;
  mc.variant = GeneratorVariant::MicrocanonicalDc;
  mc.simple_mode = false;
  mc.allow_self_loops = true;
  int exact = 0;
  for (int s = 0; s < seeds; ++s) {
    const auto deg = sample_power_law_degrees(400, 3.0, 10.0, 1, 399, std::uint64_t(s));
    exact += realized_block_matrix(sample_microcanonical_dc(rounded, cross, deg, mc, std::uint64_t(s)), cross).values() ==
             rounded.values();
  }
  return {within == 10 && exact == seeds,
          fmt("canonical %d/10 cross pairs within 3 SE (worst %.2f SE); microcanonical exact on %d/%d seeds", within,
              worst_z, exact, seeds)};
}

std::vector<std::vector<Label>> set_partitions(std::size_t n) {
  std::vector<std::vector<Label>> out;
  std::vector<Label> cur(n, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int k) {
    if (i == n) {
      out.push_back(cur);
      return;
    }
    for (int l = 0; l <= k; ++l) {
      cur[i] = l;
      rec(i + 1, std::max(k, l + 1));
    }
  };
  rec(0, 0);
  return out;
}

// 7. Modal posterior sample against the exact argmax on small graphs.
Outcome inference_oracle() {
  Rng rng(77);
  int hits = 0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 4 + uniform_index(rng, 5);
    const double p = 0.2 + 0.4 * uniform01(rng);
    std::vector<Edge> e;
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j = i + 1; j < n; ++j)
        if (bernoulli(rng, p)) e.push_back({i, j});
    const Graph g = Graph::from_edges(n, e, {});
    const auto variant = t % 2 ? InferenceVariant::Dc : InferenceVariant::Ndc;
    const int k_max = static_cast<int>(n);

    double best = INFINITY;
    std::vector<std::vector<Label>> argmax;
    for (const auto& l : set_partitions(n)) {
      const double d = description_length(g, Partition(l), variant, k_max);
      if (d < best - 1e-9) {
        best = d;
        argmax = {l};
      } else if (std::abs(d - best) <= 1e-9) {
        argmax.push_back(l);
      }
    }

    McmcConfig cfg;
    cfg.k_max = k_max;
    cfg.n_samples = 20000;
    cfg.sweeps_between_samples = 5;
    cfg.seed = 100 + std::uint64_t(t);
    std::map<std::vector<Label>, int> counts;
    for (const auto& s : sample_posterior(g, variant, cfg)) {
      const Partition c = s.partition.canonical();
      ++counts[{c.labels().begin(), c.labels().end()}];
    }
    const auto mode = std::max_element(counts.begin(), counts.end(),
                                       [](const auto& a, const auto& b) { return a.second < b.second; });
    hits += std::find(argmax.begin(), argmax.end(), mode->first) != argmax.end();
  }
  return {hits >= 18, fmt("%d/20 modal samples are exact maximizers", hits)};
}

SweepConfig desk_cell(std::vector<InferenceVariant> variants) {
  SweepConfig cfg = SweepConfig::desk();
  cfg.variants = std::move(variants);
  cfg.seed = 1;
  return cfg;
}

// 8. Bi-community recovery on both sides of the detectability threshold.
Outcome detectability() {
  const auto cfg = desk_cell({InferenceVariant::Ndc});
  const double lo = cell_at(0.5, 0.15, cfg).find(InferenceVariant::Ndc)->mean_omega_p1;
  const double hi = cell_at(0.5, 0.45, cfg).find(InferenceVariant::Ndc)->mean_omega_p1;
  return {lo >= 0.75 && hi <= 0.60, fmt("mean omega_p1 %.3f at mu=0.15, %.3f at mu=0.45", lo, hi)};
}

// 9. NDC preferred on a coarse grid.
Outcome model_preference() {
  const auto cfg = desk_cell({InferenceVariant::Ndc, InferenceVariant::Dc});
  int wins = 0;
  std::string diffs;
  for (double mu : {0.1, 0.3, 0.5}) {
    for (double lambda : {0.1, 0.3, 0.5}) {
      const auto cell = cell_at(lambda, mu, cfg);
      const double d = cell.find(InferenceVariant::Ndc)->log_evidence - cell.find(InferenceVariant::Dc)->log_evidence;
      wins += d > 0;
      diffs += fmt(" %.1f", d);
    }
  }
  return {wins >= 7, fmt("NDC preferred in %d/9 cells (ndc - dc:%s)", wins, diffs.c_str())};
}

// 10. Coexistence confined to few cells on region boundaries.
Outcome coexistence_scarcity() {
  const auto cfg = desk_cell({InferenceVariant::Dc});
  const int n = 10;
  std::vector<std::vector<std::optional<double>>> alpha(n, std::vector<std::optional<double>>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto cell = cell_at(cfg.lambda_values[std::size_t(j)], cfg.mu_values[std::size_t(i)], cfg);
      alpha[std::size_t(i)][std::size_t(j)] = coexistence_fraction(cell.samples, InferenceVariant::Dc, 0.75).alpha;
    }
  }
  auto mixed = [](const std::optional<double>& a) { return a && *a > 0.05 && *a < 0.95; };
  int count = 0, isolated = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!mixed(alpha[std::size_t(i)][std::size_t(j)])) continue;
      ++count;
      bool near = false;
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          const int a = i + di, b = j + dj;
          if (a < 0 || b < 0 || a >= n || b >= n) continue;
          const auto& x = alpha[std::size_t(a)][std::size_t(b)];
          near |= x.has_value() && !mixed(x);
        }
      isolated += !near;
    }
  }
  return {count <= 15 && isolated == 0,
          fmt("%d/100 cells with alpha in (0.05, 0.95), %d not adjacent to a dominated cell", count, isolated)};
}

// 11. q1 + q2 never grows with the threshold, on every cell evaluated above.
Outcome threshold_monotonicity() {
  int checked = 0, violations = 0;
  for (const auto& cell : evaluated) {
    for (const auto& v : cell.variants) {
      ++checked;
      std::size_t prev = SIZE_MAX;
      for (double t : {0.75, 0.85, 0.95}) {
        const auto q = coexistence_fraction(cell.samples, v.variant, t);
        violations += q.q1 + q.q2 > prev;
        prev = q.q1 + q.q2;
      }
    }
  }
  return {checked > 0 && violations == 0, fmt("%d cell-variants, %d violations", checked, violations)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
    double budget_s;  // 0 = no stated budget
  };
  const Criterion all[] = {
      {1, "construction exactness", construction_exactness, 5},
      {2, "hand-computed reference values", reference_values, 0},
      {3, "general-size solver", general_solver, 0},
      {4, "Farkas iff", farkas_iff, 0},
      {5, "overlap oracle", overlap_oracle, 0},
      {6, "sampler statistics", sampler_statistics, 120},
      {7, "inference oracle", inference_oracle, 600},
      {8, "detectability threshold", detectability, 1800},
      {9, "model preference", model_preference, 0},
      {10, "coexistence scarcity", coexistence_scarcity, 0},
      {11, "threshold monotonicity", threshold_monotonicity, 0},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += fmt(" [over %.0f s budget]", c.budget_s);
    }
    failed += !o.pass;
    std::printf("%s criterion %d (%s): %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
