#pragma once

// The (lambda, mu) grid experiment: planted graphs per cell, posterior samples
// per graph, overlaps, coexistence fractions and diagnostics.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "scbm/generate.hpp"
#include "scbm/infer.hpp"

namespace scbm {

/// "lo:hi:step" (inclusive, values rounded to 12 decimals) or a comma list.
std::vector<double> parse_range(const std::string& s);

struct SweepConfig {
  double n_nodes = 400;
  std::vector<double> c_list{5, 10, 20};
  std::vector<double> mu_values;
  std::vector<double> lambda_values;
  int replicas = 8;
  std::size_t samples_per_graph = 50;
  std::vector<GeneratorVariant> generators{GeneratorVariant::Canonical};
  std::vector<InferenceVariant> variants{InferenceVariant::Ndc, InferenceVariant::Dc};
  std::vector<double> omega_thresholds{0.75, 0.85, 0.95};
  std::uint64_t seed = 0;
  std::size_t burn_in_sweeps = 1000;
  std::size_t sweeps_between_samples = 10;
  int k_max = 0;
  double gamma = 3.0;
  std::string profile = "full";

  /// Grid step 0.01 on (0, 0.5], 8 replicas, 50 samples.
  static SweepConfig full();
  /// Grid step 0.05 on (0, 0.5], 2 replicas, 10 samples.
  static SweepConfig desk();

  /// Throws InvalidArgument on empty lists, zero or out-of-range grid values,
  /// or thresholds outside (0, 1].
  void validate() const;
};

/// Flat key=value text using the SweepConfig field names (mu_range and
/// lambda_range take parse_range syntax; lists are comma separated). A
/// "profile" key selects the starting defaults wherever it appears.
SweepConfig parse_sweep_config(const std::string& text);
/// One key=value pair applied on top of cfg.
void apply_sweep_option(SweepConfig& cfg, const std::string& key, const std::string& value);

struct SampleRecord {
  InferenceVariant variant = InferenceVariant::Ndc;
  int replica = 0;
  std::size_t sample_index = 0;
  double omega_cross = 0.0;
  double omega_p1 = 0.0;
  double omega_p2 = 0.0;
  double dl = 0.0;
  int inferred_k = 0;
};

struct Coexistence {
  std::size_t q1 = 0;  // samples with omega_p1 >= omega_T
  std::size_t q2 = 0;  // samples with omega_p2 >= omega_T
  /// q1 / (q1 + q2); empty when both are zero.
  std::optional<double> alpha;
};

struct VariantSummary {
  InferenceVariant variant = InferenceVariant::Ndc;
  double mean_omega_cross = 0.0;
  double mean_omega_p1 = 0.0;
  double mean_omega_p2 = 0.0;
  std::vector<Coexistence> coexistence;  // one per omega threshold
  /// Mean over replicas of -<Sigma> + H.
  double log_evidence = 0.0;
};

struct CellResult {
  double lambda = 0.0;
  double mu = 0.0;
  double c = 0.0;
  GeneratorVariant generator = GeneratorVariant::Canonical;
  std::vector<SampleRecord> samples;
  std::vector<VariantSummary> variants;
  /// Replica means.
  double degree_variance = 0.0;
  double js_distance = 0.0;
  double frob_dev_p1 = 0.0;
  double frob_dev_p2 = 0.0;
  /// "ok", or "failed: <reason>" with every metric left empty.
  std::string status = "ok";

  const VariantSummary* find(InferenceVariant v) const;
};

Coexistence coexistence_fraction(const std::vector<SampleRecord>& samples, InferenceVariant variant, double omega_t);
Coexistence coexistence_fraction(const CellResult& cell, InferenceVariant variant, double omega_t);

/// Seed of one replica graph.
std::uint64_t cell_seed(std::uint64_t base, double lambda, double mu, double c, GeneratorVariant g, int replica);

/// Builds the factor matrices with beta = E / n^2, generates the replicas and
/// samples every inference variant on each. Errors carry the cell coordinates.
CellResult run_cell(double lambda, double mu, double c, GeneratorVariant generator, const SweepConfig& cfg);

struct CellKey {
  double lambda, mu, c;
  GeneratorVariant generator;
};
/// Cells in output order: c, generator, mu, lambda (lambda fastest).
std::vector<CellKey> grid_cells(const SweepConfig& cfg);

struct GridSummary {
  std::size_t cells = 0;
  std::size_t skipped = 0;  // already complete when resuming
  std::size_t failed = 0;
};

/// Runs every cell on `jobs` threads and writes results.csv, summary.csv and
/// grid.json into out_dir. Output is in grid order regardless of jobs. With
/// resume, cells already present in summary.csv are kept and the rest rerun;
/// grid.json must match the config. Failed cells are marked in the status
/// column and do not stop the grid.
GridSummary run_grid(const SweepConfig& cfg, const std::filesystem::path& out_dir, int jobs = 1, bool resume = false,
                     const std::function<void(const CellResult&)>& on_cell = {});

/// CSV headers and rows.
std::string results_header();
std::string summary_header(const std::vector<double>& omega_thresholds);
std::string results_rows(const CellResult& cell);
std::string summary_rows(const CellResult& cell, const std::vector<double>& omega_thresholds);
std::string grid_metadata_json(const SweepConfig& cfg);

/// Parsed CSV with a header row; fields are kept as text.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// Throws InvalidArgument if the column is absent.
  std::size_t column(const std::string& name) const;
};
CsvTable read_csv(const std::string& text);

/// Recomputes per-cell, per-variant mean overlaps and alpha at the given
/// thresholds from a results table. Evidence and diagnostics columns are
/// copied from `summary` when given (matched on cell and variant).
std::string analyze_results(const CsvTable& results, const std::vector<double>& omega_thresholds,
                            const CsvTable* summary = nullptr);

}  // namespace scbm
