// scbm: construct, generate, infer, sweep, analyze, plot.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "scbm/cross_block.hpp"
#include "scbm/generate.hpp"
#include "scbm/heatmap.hpp"
#include "scbm/infer.hpp"
#include "scbm/io.hpp"
#include "scbm/sweep.hpp"

using namespace scbm;

namespace {

struct Usage : Error {
  using Error::Error;
};

const CLI::Validator kOpenUnit(
    [](std::string& s) -> std::string {
      try {
        const double x = parse_double(s);
        if (x > 0 && x < 1) return {};
      } catch (const Error&) {
      }
      return "value must lie strictly between 0 and 1, got " + s;
    },
    "(0,1)");

std::uint64_t seed_or_env(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("SCBM_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw Usage(std::string("SCBM_SEED must be a nonnegative integer, got '") + env + "'");
  }
  return 0;
}

bool config_sets_seed(const std::string& text) {
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos || line.find('#') < eq) continue;
    if (CLI::detail::trim_copy(line.substr(0, eq)) == "seed") return true;
  }
  return false;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

std::vector<double> parse_sizes(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(parse_double(tok));
  return out;
}

// Factor matrices and CrossSpec for one (mu, lambda, N, c) point.
CrossSpec build_spec(double mu, double lambda, double n_nodes, double c, const std::string& sizes) {
  const double n_edges = c * n_nodes / 2;
  const auto theta1 = make_theta_bicommunity(mu, factor_beta(n_edges, n_nodes / 2));
  const auto theta2 = make_theta_coreperiphery(lambda, factor_beta(n_edges, n_nodes / 2));
  if (sizes.empty()) return cross_block_matrix_equal(theta1, theta2, density(n_nodes, n_edges), n_nodes);
  const auto nu = parse_sizes(sizes);
  if (nu.size() != 4) throw Usage("--sizes needs 4 cross-block sizes, got " + std::to_string(nu.size()));
  double total = 0;
  for (double x : nu) total += x;
  if (std::abs(total - n_nodes) > 1e-9)
    throw Usage("--sizes sum to " + format_double(total) + " but --n is " + format_double(n_nodes));
  return cross_block_matrix_general({theta1, theta2}, Eigen::Map<const Eigen::VectorXd>(nu.data(), 4));
}

std::string residual_text(const ResidualReport& r) {
  std::ostringstream os;
  os << "consistency residual: max_abs=" << format_double(r.max_abs) << " max_rel=" << format_double(r.max_rel)
     << "\n";
  for (const auto& e : r.entries)
    os << "  factor " << e.factor << " (" << e.r << ", " << e.s << "): expected=" << format_double(e.expected)
       << " actual=" << format_double(e.actual) << "\n";
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic cross-block model benchmark: construction, sampling, inference and grid sweeps"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "scbm 1.0.0");

  // construct
  double mu = 0, lambda = 0, n_nodes = 400, c = 10;
  std::string sizes, out;
  auto* construct = app.add_subcommand("construct", "Build a cross-block spec and print its residual report");
  construct->add_option("--mu", mu, "Bi-community mixing in (0, 1)")->required()->check(kOpenUnit);
  construct->add_option("--lambda", lambda, "Core-periphery parameter in (0, 1)")->required()->check(kOpenUnit);
  construct->add_option("--n", n_nodes, "Number of nodes")->capture_default_str()->check(CLI::PositiveNumber);
  construct->add_option("--c", c, "Expected degree")->capture_default_str()->check(CLI::PositiveNumber);
  construct->add_option("--sizes", sizes, "Comma-separated cross-block sizes (general solver)");
  construct->add_option("--out", out, "Spec JSON path (default stdout)");

  // generate
  std::string spec_path, generator = "canonical", partition_out, report_out;
  std::optional<std::uint64_t> seed;
  double gamma = 3.0;
  bool multigraph = false, self_loops = false;
  auto* generate = app.add_subcommand("generate", "Sample a graph from a spec or from model parameters");
  generate->add_option("--spec", spec_path, "Spec JSON written by construct")->check(CLI::ExistingFile);
  auto* g_mu = generate->add_option("--mu", mu, "Bi-community mixing in (0, 1)")->check(kOpenUnit);
  auto* g_lambda = generate->add_option("--lambda", lambda, "Core-periphery parameter in (0, 1)")->check(kOpenUnit);
  generate->add_option("--n", n_nodes, "Number of nodes")->capture_default_str()->check(CLI::PositiveNumber);
  generate->add_option("--c", c, "Expected degree")->capture_default_str()->check(CLI::PositiveNumber);
  generate->add_option("--sizes", sizes, "Comma-separated cross-block sizes");
  generate->add_option("--generator", generator, "canonical, microcanonical_dc or mmsbm")
      ->capture_default_str()
      ->check(CLI::IsMember({"canonical", "microcanonical_dc", "mmsbm"}));
  generate->add_option("--gamma", gamma, "Power-law exponent of target degrees (microcanonical)")
      ->capture_default_str();
  generate->add_flag("--multigraph", multigraph, "Allow parallel edges (microcanonical)");
  generate->add_flag("--self-loops", self_loops, "Allow self-loops (canonical, microcanonical)");
  generate->add_option("--seed", seed, "Random seed (default $SCBM_SEED or 0)");
  generate->add_option("--out", out, "Graph TSV path (default stdout)");
  generate->add_option("--partition-out", partition_out, "Planted cross partition path");
  generate->add_option("--report-out", report_out, "Generation report JSON path");
  g_mu->excludes("--spec");
  g_lambda->excludes("--spec");

  // infer
  std::string graph_path, variant = "ndc", init = "random";
  McmcConfig mc;
  auto* infer = app.add_subcommand("infer", "Sample partitions from the SBM posterior of a graph");
  infer->add_option("--graph", graph_path, "Graph TSV")->required()->check(CLI::ExistingFile);
  infer->add_option("--variant", variant, "ndc or dc")->capture_default_str()->check(CLI::IsMember({"ndc", "dc"}));
  infer->add_option("--samples", mc.n_samples, "Number of posterior samples")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  infer->add_option("--burn-in", mc.burn_in_sweeps, "Sweeps before the first sample")->capture_default_str();
  infer->add_option("--spacing", mc.sweeps_between_samples, "Sweeps between samples")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  infer->add_option("--k-max", mc.k_max, "Block cap (0 = ceil(N/10))")->capture_default_str()->check(CLI::NonNegativeNumber);
  infer->add_option("--init", init, "random or single")->capture_default_str()->check(CLI::IsMember({"random", "single"}));
  infer->add_option("--seed", seed, "Random seed (default $SCBM_SEED or 0)");
  infer->add_option("--out", out, "Posterior file path (default stdout)");

  // sweep
  std::string config_path, profile, out_dir;
  std::vector<std::string> overrides;
  int jobs = 1;
  bool resume = false, quiet = false;
  auto* sweep = app.add_subcommand("sweep", "Run the (lambda, mu) grid experiment");
  sweep->add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
  sweep->add_option("--profile", profile, "desk or full defaults")->check(CLI::IsMember({"desk", "full"}));
  sweep->add_option("--set", overrides, "Override a config key (key=value, repeatable)");
  sweep->add_option("--seed", seed, "Base seed (overrides the config; default $SCBM_SEED or 0)");
  sweep->add_option("--out", out_dir, "Output directory")->required();
  sweep->add_option("--jobs", jobs, "Parallel workers")->capture_default_str()->check(CLI::PositiveNumber);
  sweep->add_flag("--resume", resume, "Keep completed cells from a previous run");
  sweep->add_flag("--quiet", quiet, "No per-cell progress on stderr");

  // analyze
  std::string results_path, summary_path;
  std::vector<double> thresholds;
  auto* analyze = app.add_subcommand("analyze", "Recompute the summary table from raw results");
  analyze->add_option("--results", results_path, "results.csv")->required()->check(CLI::ExistingFile);
  analyze->add_option("--summary", summary_path, "summary.csv to carry evidence and diagnostics from")
      ->check(CLI::ExistingFile);
  analyze->add_option("--omega-t", thresholds, "Overlap thresholds (repeatable; default 0.75 0.85 0.95)")
      ->check(CLI::Range(0.0, 1.0));
  analyze->add_option("--out", out, "Output CSV (default stdout)");

  // plot
  std::string metric = "omega_cross", plot_c, plot_generator, plot_variant, title;
  double omega_t = 0.75;
  auto* plot = app.add_subcommand("plot", "Render a summary metric as an SVG heatmap");
  plot->add_option("--summary", summary_path, "summary.csv")->required()->check(CLI::ExistingFile);
  plot->add_option("--metric", metric, "omega_cross, omega_p1, omega_p2, alpha, log_evidence_diff, "
                                       "degree_variance or js_distance")
      ->capture_default_str()
      ->check(CLI::IsMember({"omega_cross", "omega_p1", "omega_p2", "alpha", "log_evidence_diff", "degree_variance",
                             "js_distance"}));
  plot->add_option("--omega-t", omega_t, "Threshold of the alpha column")->capture_default_str();
  plot->add_option("--c", plot_c, "Select rows with this expected degree");
  plot->add_option("--generator", plot_generator, "Select rows with this generator");
  plot->add_option("--variant", plot_variant, "Select rows with this inference variant");
  plot->add_option("--title", title, "Plot title");
  plot->add_option("--out", out, "SVG path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*construct) {
      const auto spec = build_spec(mu, lambda, n_nodes, c, sizes);
      const auto report = consistency_check(spec);
      emit(out, cross_spec_to_json(spec, &report));
      (out.empty() ? std::cerr : std::cout) << "method: " << spec.method << "\n" << residual_text(report);
    } else if (*generate) {
      if (spec_path.empty() && (!*g_mu || !*g_lambda)) throw Usage("generate needs --spec or both --mu and --lambda");
      const auto spec = spec_path.empty() ? build_spec(mu, lambda, n_nodes, c, sizes)
                                          : cross_spec_from_json(read_text_file(spec_path));
      GeneratorConfig gc;
      gc.variant = parse_generator_variant(generator);
      gc.simple_mode = !multigraph;
      gc.allow_self_loops = self_loops;
      gc.gamma = gamma;
      const auto gg = generate_graph(spec, gc, seed_or_env(seed));
      std::ostringstream g;
      write_graph(g, gg.graph);
      emit(out, g.str());
      if (!partition_out.empty()) save_partition(partition_out, gg.cross);
      if (!report_out.empty()) write_text_file(report_out, generation_report_to_json(gg.report));
      for (const auto& w : gg.report.warnings) std::cerr << "warning: " << w << "\n";
    } else if (*infer) {
      const auto g = load_graph(graph_path);
      mc.seed = seed_or_env(seed);
      mc.init = init == "single" ? InitMode::SingleBlock : InitMode::Random;
      ChainStats stats;
      const auto samples = sample_posterior(g, parse_inference_variant(variant), mc, &stats);
      std::ostringstream os;
      write_posterior(os, samples, mc.seed);
      emit(out, os.str());
      if (stats.dropped_self_loops || stats.collapsed_edges)
        std::cerr << "note: dropped " << stats.dropped_self_loops << " self-loops and collapsed "
                  << stats.collapsed_edges << " parallel edges\n";
      std::cerr << "log evidence: " << format_double(log_evidence(samples)) << "\n";
    } else if (*sweep) {
      SweepConfig cfg = config_path.empty() ? SweepConfig::full() : parse_sweep_config(read_text_file(config_path));
      const bool config_has_seed = !config_path.empty() && config_sets_seed(read_text_file(config_path));
      if (!profile.empty()) apply_sweep_option(cfg, "profile", profile);
      for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Usage("--set expects key=value, got '" + kv + "'");
        apply_sweep_option(cfg, kv.substr(0, eq), kv.substr(eq + 1));
      }
      if (seed || !config_has_seed) cfg.seed = seed_or_env(seed);
      const auto total = grid_cells(cfg).size();
      std::size_t finished = 0;
      const auto gs = run_grid(cfg, out_dir, jobs, resume, [&](const CellResult& cell) {
        ++finished;
        if (!quiet)
          std::cerr << "[" << finished << "/" << total << "] lambda=" << format_double(cell.lambda)
                    << " mu=" << format_double(cell.mu) << " c=" << format_double(cell.c) << " "
                    << to_string(cell.generator) << ": " << cell.status << "\n";
      });
      std::cerr << gs.cells << " cells, " << gs.skipped << " resumed, " << gs.failed << " failed\n";
      if (gs.failed) return 1;
    } else if (*analyze) {
      if (thresholds.empty()) thresholds = {0.75, 0.85, 0.95};
      const auto results = read_csv(read_text_file(results_path));
      std::optional<CsvTable> summary;
      if (!summary_path.empty()) summary = read_csv(read_text_file(summary_path));
      emit(out, analyze_results(results, thresholds, summary ? &*summary : nullptr));
    } else if (*plot) {
      PlotSpec ps;
      ps.metric = parse_plot_metric(metric);
      ps.omega_t = omega_t;
      if (!plot_c.empty()) ps.c = plot_c;
      if (!plot_generator.empty()) ps.generator = plot_generator;
      if (!plot_variant.empty()) ps.variant = plot_variant;
      ps.title = title;
      const auto grid = heatmap_grid(read_csv(read_text_file(summary_path)), ps);
      emit(out, render_heatmap_svg(grid, ps));
    }
  } catch (const Usage& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InconsistentSystem& e) {
    std::cerr << "error: " << e.what() << "\nresidual: " << format_double(e.residual()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
