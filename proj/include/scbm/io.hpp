#pragma once

// Text formats for graphs, partitions, cross specs and posterior samples.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "scbm/core.hpp"
#include "scbm/cross_block.hpp"
#include "scbm/generate.hpp"
#include "scbm/infer.hpp"

namespace scbm {

/// Shortest decimal that parses back to the same double; "nan", "inf", "-inf" otherwise.
std::string format_double(double x);
/// Parses a double, accepting the spellings produced by format_double.
double parse_double(const std::string& s);

/// Edge list, one "i<TAB>j" line per edge (repeated for multi-edges), preceded by
/// "# n_nodes=", "# simple_mode=" and "# allow_self_loops=" header lines.
void write_graph(std::ostream& os, const Graph& g);
Graph read_graph(std::istream& is);

/// One label per line. The reader also accepts a bracketed array such as
/// "[0, 1, 1]"; blank lines and '#' comments are ignored.
void write_partition(std::ostream& os, const Partition& p);
Partition read_partition(std::istream& is);

/// JSON object with the factor matrices, cross sizes, theta, rho, normalizers
/// and method. The residual report is included when given; the reader ignores it.
std::string cross_spec_to_json(const CrossSpec& spec, const ResidualReport* residuals = nullptr);
CrossSpec cross_spec_from_json(const std::string& text);

std::string generation_report_to_json(const GenerationReport& report);

/// First line "# " + JSON metadata (variant, per-sample DL and sweep index),
/// then one partition per line as space-separated labels.
void write_posterior(std::ostream& os, const std::vector<PosteriorSample>& samples, std::uint64_t seed);
std::vector<PosteriorSample> read_posterior(std::istream& is);

/// File wrappers; throw Error naming the path when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
Graph load_graph(const std::filesystem::path& path);
void save_graph(const std::filesystem::path& path, const Graph& g);
Partition load_partition(const std::filesystem::path& path);
void save_partition(const std::filesystem::path& path, const Partition& p);

}  // namespace scbm
