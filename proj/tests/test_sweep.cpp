#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "scbm/heatmap.hpp"
#include "scbm/io.hpp"
#include "scbm/sweep.hpp"

using namespace scbm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("scbm_test_sweep_" + name);
  fs::remove_all(p);
  return p;
}

SweepConfig toy() {
  SweepConfig cfg = SweepConfig::desk();
  cfg.n_nodes = 100;
  cfg.c_list = {10};
  cfg.mu_values = {0.1, 0.4};
  cfg.lambda_values = {0.1, 0.4};
  cfg.replicas = 1;
  cfg.samples_per_graph = 3;
  cfg.burn_in_sweeps = 30;
  cfg.sweeps_between_samples = 2;
  cfg.seed = 11;
  return cfg;
}

SweepConfig one_cell(double n, std::size_t samples) {
  SweepConfig cfg = SweepConfig::desk();
  cfg.n_nodes = n;
  cfg.replicas = 1;
  cfg.samples_per_graph = samples;
  cfg.variants = {InferenceVariant::Ndc};
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST_CASE("ranges") {
  const auto r = parse_range("0.05:0.50:0.05");
  REQUIRE(r.size() == 10);
  CHECK(r[2] == 0.15);
  CHECK(r.back() == 0.5);
  CHECK(format_double(r[6]) == "0.35");
  CHECK(parse_range("0.01:0.50:0.01").size() == 50);
  CHECK(parse_range("0.1, 0.3,0.5") == std::vector<double>{0.1, 0.3, 0.5});
  CHECK_THROWS_AS(parse_range("0.1:0.5"), InvalidArgument);
  CHECK_THROWS_AS(parse_range("0.5:0.1:0.1"), InvalidArgument);
  CHECK_THROWS_AS(parse_range(""), InvalidArgument);
}

TEST_CASE("config parsing") {
  const auto cfg = parse_sweep_config("# comment\nreplicas = 3\nprofile=desk\nc_list=10\nvariants=dc\nseed=9\n");
  CHECK(cfg.profile == "desk");
  CHECK(cfg.replicas == 3);  // explicit keys win over the profile wherever it appears
  CHECK(cfg.samples_per_graph == 10);
  CHECK(cfg.mu_values.size() == 10);
  CHECK(cfg.c_list == std::vector<double>{10});
  CHECK(cfg.variants == std::vector<InferenceVariant>{InferenceVariant::Dc});
  CHECK(cfg.seed == 9);
  const auto full = parse_sweep_config("");
  CHECK(full.replicas == 8);
  CHECK(full.samples_per_graph == 50);
  CHECK(full.lambda_values.size() == 50);
  CHECK_THROWS_AS(parse_sweep_config("colour=blue\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_sweep_config("replicas\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_sweep_config("replicas=2.5\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_sweep_config("profile=huge\n"), InvalidArgument);

  auto bad = SweepConfig::desk();
  bad.mu_values = {0.0, 0.1};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = SweepConfig::desk();
  bad.omega_thresholds = {1.5};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = SweepConfig::desk();
  bad.n_nodes = 402;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  CHECK_NOTHROW(SweepConfig::full().validate());
}

TEST_CASE("coexistence fraction examples") {
  const auto rec = [](double o1, double o2) {
    SampleRecord s;
    s.omega_p1 = o1;
    s.omega_p2 = o2;
    return s;
  };
  const std::vector<SampleRecord> bi{rec(0.9, 0.5), rec(0.95, 0.55)};
  const auto a = coexistence_fraction(bi, InferenceVariant::Ndc, 0.75);
  CHECK(a.q1 == 2);
  CHECK(a.q2 == 0);
  CHECK(*a.alpha == 1.0);
  const auto h = coexistence_fraction({rec(0.9, 0.5), rec(0.5, 0.8)}, InferenceVariant::Ndc, 0.75);
  CHECK(*h.alpha == 0.5);
  CHECK_FALSE(coexistence_fraction({rec(0.6, 0.6)}, InferenceVariant::Ndc, 0.75).alpha.has_value());
  // other variants are ignored
  CHECK_FALSE(coexistence_fraction(bi, InferenceVariant::Dc, 0.75).alpha.has_value());
  // both at once count toward q1 and q2
  const auto both = coexistence_fraction({rec(1.0, 1.0)}, InferenceVariant::Ndc, 0.75);
  CHECK(both.q1 + both.q2 == 2);
}

TEST_CASE("raising the threshold never increases q1 + q2") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<SampleRecord> s(20);
    for (auto& x : s) {
      x.omega_p1 = 0.5 + 0.5 * uniform01(rng);
      x.omega_p2 = 0.5 + 0.5 * uniform01(rng);
    }
    std::size_t prev = SIZE_MAX;
    for (double t : {0.75, 0.85, 0.95}) {
      const auto c = coexistence_fraction(s, InferenceVariant::Ndc, t);
      CHECK(c.q1 + c.q2 <= prev);
      prev = c.q1 + c.q2;
      if (c.alpha) CHECK((*c.alpha >= 0.0 && *c.alpha <= 1.0));
    }
  }
}

TEST_CASE("cell seeds differ across coordinates") {
  const auto s = cell_seed(1, 0.1, 0.2, 10, GeneratorVariant::Canonical, 0);
  CHECK(s == cell_seed(1, 0.1, 0.2, 10, GeneratorVariant::Canonical, 0));
  CHECK(s != cell_seed(1, 0.2, 0.1, 10, GeneratorVariant::Canonical, 0));
  CHECK(s != cell_seed(1, 0.1, 0.2, 10, GeneratorVariant::Canonical, 1));
  CHECK(s != cell_seed(2, 0.1, 0.2, 10, GeneratorVariant::Canonical, 0));
  CHECK(s != cell_seed(1, 0.1, 0.2, 5, GeneratorVariant::Canonical, 0));
  CHECK(s != cell_seed(1, 0.1, 0.2, 10, GeneratorVariant::MicrocanonicalDc, 0));
}

TEST_CASE("run_cell without planted signal") {
  const auto cell = run_cell(0.5, 0.5, 10, GeneratorVariant::Canonical, one_cell(400, 5));
  const auto* s = cell.find(InferenceVariant::Ndc);
  REQUIRE(s);
  CHECK(std::abs(s->mean_omega_p1 - 0.5) <= 0.05);
  CHECK(std::abs(s->mean_omega_p2 - 0.5) <= 0.05);
  CHECK(cell.samples.size() == 5);
  for (const auto& r : cell.samples) {
    CHECK((r.omega_cross >= 0 && r.omega_cross <= 1 && r.omega_p1 >= 0 && r.omega_p1 <= 1));
    // below one half only with more than two blocks
    if (r.omega_p1 < 0.5 || r.omega_p2 < 0.5) CHECK(r.inferred_k > 2);
  }
}

TEST_CASE("run_cell recovers a strong bi-community") {
  const auto cell = run_cell(0.5, 0.05, 10, GeneratorVariant::Canonical, one_cell(400, 5));
  CHECK(cell.find(InferenceVariant::Ndc)->mean_omega_p1 >= 0.9);
}

TEST_CASE("run_cell recovers the cross partition when both structures are strong") {
  const auto cell = run_cell(0.01, 0.01, 20, GeneratorVariant::Canonical, one_cell(400, 5));
  const auto* s = cell.find(InferenceVariant::Ndc);
  CHECK(s->mean_omega_cross > s->mean_omega_p1);
  CHECK(s->mean_omega_cross > s->mean_omega_p2);
}

TEST_CASE("coarse grid shows the three recovery regions") {
  auto cfg = SweepConfig::desk();
  cfg.variants = {InferenceVariant::Ndc};
  cfg.seed = 1;
  auto at = [&](double lambda, double mu) {
    return *run_cell(lambda, mu, 10, GeneratorVariant::Canonical, cfg).find(InferenceVariant::Ndc);
  };
  const auto cross = at(0.1, 0.1), bi = at(0.5, 0.1), cp = at(0.1, 0.5), none = at(0.5, 0.5);
  CHECK(cross.mean_omega_cross >= 0.75);
  CHECK(bi.mean_omega_p1 >= 0.9);
  CHECK(bi.mean_omega_cross <= 0.6);
  CHECK(cp.mean_omega_p2 >= 0.8);
  CHECK(cp.mean_omega_p1 <= 0.6);
  CHECK(none.mean_omega_p1 <= 0.6);
  CHECK(none.mean_omega_p2 <= 0.6);
}

TEST_CASE("run_cell attaches coordinates to failures") {
  auto cfg = one_cell(8, 2);
  try {
    run_cell(0.1, 0.1, 6, GeneratorVariant::MicrocanonicalDc, cfg);
    FAIL("expected a generation failure");
  } catch (const GenerationFailure& e) {
    CHECK(std::string(e.what()).find("cell (lambda=0.1, mu=0.1, c=6") != std::string::npos);
  }
}

TEST_CASE("grid output is deterministic, lossless and resumable") {
  const auto cfg = toy();
  const auto a = scratch("a"), b = scratch("b"), c = scratch("c");
  std::vector<CellResult> cells;
  const auto gs = run_grid(cfg, a, 1, false, [&](const CellResult& r) { cells.push_back(r); });
  CHECK(gs.cells == 4);
  CHECK(gs.failed == 0);
  run_grid(cfg, b, 3);
  for (const char* f : {"results.csv", "summary.csv", "grid.json"})
    CHECK(read_text_file(a / f) == read_text_file(b / f));

  // lossless: every recorded number parses back to the computed value
  const auto results = read_csv(read_text_file(a / "results.csv"));
  REQUIRE(results.rows.size() == 4 * 3 * 2);
  CHECK(results.header == std::vector<std::string>{"lambda", "mu", "c", "generator", "variant", "replica",
                                                   "sample_index", "omega_cross", "omega_p1", "omega_p2", "dl",
                                                   "inferred_k"});
  std::size_t row = 0;
  const auto grid = grid_cells(cfg);
  for (const auto& key : grid) {
    const auto it = std::find_if(cells.begin(), cells.end(),
                                 [&](const auto& x) { return x.lambda == key.lambda && x.mu == key.mu; });
    REQUIRE(it != cells.end());
    for (const auto& s : it->samples) {
      const auto& r = results.rows[row++];
      CHECK(parse_double(r[0]) == key.lambda);
      CHECK(parse_double(r[1]) == key.mu);
      CHECK(parse_double(r[7]) == s.omega_cross);
      CHECK(parse_double(r[10]) == s.dl);
      CHECK(std::stoi(r[11]) == s.inferred_k);
    }
  }
  const auto summary = read_csv(read_text_file(a / "summary.csv"));
  CHECK(summary.rows.size() == 8);
  CHECK(summary.column("alpha_0.85") == 9);
  CHECK(summary.header.back() == "status");
  CHECK(summary.header[summary.header.size() - 2] == "rmi");

  // resume after a partial run: drop the last cell and half of another
  fs::create_directories(c);
  fs::copy(a / "grid.json", c / "grid.json");
  const auto res = read_text_file(a / "results.csv"), sum = read_text_file(a / "summary.csv");
  std::size_t cut = 0;
  for (int k = 0; k < 1 + 6 + 6 + 2; ++k) cut = res.find('\n', cut) + 1;
  write_text_file(c / "results.csv", res.substr(0, cut));
  cut = 0;
  for (int k = 0; k < 1 + 2 + 2 + 2; ++k) cut = sum.find('\n', cut) + 1;
  write_text_file(c / "summary.csv", sum.substr(0, cut));
  const auto rs = run_grid(cfg, c, 1, true);
  CHECK(rs.skipped == 2);
  CHECK(read_text_file(c / "results.csv") == res);
  CHECK(read_text_file(c / "summary.csv") == sum);

  // resuming against a different configuration is refused
  auto other = cfg;
  other.seed = 12;
  CHECK_THROWS_AS(run_grid(other, c, 1, true), InvalidArgument);

  // analyze reproduces the summary from raw results
  CHECK(analyze_results(results, cfg.omega_thresholds, &summary) == sum);
  const auto only85 = read_csv(analyze_results(results, {0.85}));
  CHECK(only85.column("alpha_0.85") == 8);
  for (const auto& p : {a, b, c}) fs::remove_all(p);
}

TEST_CASE("failed cells are marked and the grid completes") {
  SweepConfig cfg = toy();
  cfg.n_nodes = 8;
  cfg.c_list = {6};
  cfg.generators = {GeneratorVariant::MicrocanonicalDc};
  cfg.mu_values = {0.1};
  cfg.lambda_values = {0.1};
  const auto dir = scratch("fail");
  const auto gs = run_grid(cfg, dir);
  CHECK(gs.failed == 1);
  const auto summary = read_csv(read_text_file(dir / "summary.csv"));
  REQUIRE(summary.rows.size() == 2);
  CHECK(summary.rows[0][summary.column("status")].rfind("failed: ", 0) == 0);
  CHECK(summary.rows[0][summary.column("mean_omega_cross")].empty());
  CHECK(read_csv(read_text_file(dir / "results.csv")).rows.empty());
  CHECK(run_grid(cfg, dir, 1, true).failed == 1);
  fs::remove_all(dir);
}

TEST_CASE("csv reader") {
  const auto t = read_csv("a,b,c\n1,\"x, \"\"y\"\"\",\n");
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][1] == "x, \"y\"");
  CHECK(t.rows[0][2].empty());
  CHECK_THROWS_AS(read_csv("a,b\n1\n"), InvalidArgument);
  CHECK_THROWS_AS(read_csv(""), InvalidArgument);
  CHECK_THROWS_AS(t.column("z"), InvalidArgument);
}

namespace {

CsvTable summary_of(const std::vector<std::vector<std::string>>& rows) {
  std::string text = summary_header({0.75, 0.85, 0.95});
  for (const auto& r : rows) {
    // lambda, mu, alpha_0.75, log_evidence_ndc, log_evidence_dc; other fields constant
    text += r[0] + "," + r[1] + ",10,canonical,ndc,0.5,0.5,0.5," + r[2] + ",,," + r[3] + "," + r[4] + ",1,1,1,1,,ok\n";
  }
  return read_csv(text);
}

std::size_t count(const std::string& s, const std::string& what) {
  std::size_t n = 0;
  for (auto p = s.find(what); p != std::string::npos; p = s.find(what, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("heatmap of a constant metric") {
  const auto t = summary_of({{"0.1", "0.1", "1", "-5", "-6"},
                             {"0.2", "0.1", "1", "-5", "-6"},
                             {"0.1", "0.2", "1", "-5", "-6"},
                             {"0.2", "0.2", "1", "-5", "-6"}});
  PlotSpec ps;
  ps.metric = PlotMetric::DegreeVariance;
  const auto g = heatmap_grid(t, ps);
  CHECK(g.lambdas == std::vector<double>{0.1, 0.2});
  const auto svg = render_heatmap_svg(g, ps);
  const auto fill = "fill=\"" + heatmap_color(ps.metric, 0.5) + "\"><title>";
  CHECK(count(svg, fill) == 4);
  // colour bar endpoints both read the constant
  CHECK(count(svg, "class=\"bar-label\"") == 3);
  CHECK(count(svg, ">1</text>") == 3);
  CHECK(svg == render_heatmap_svg(heatmap_grid(t, ps), ps));  // byte-stable
}

TEST_CASE("alpha heatmap greys exactly the undefined cell") {
  const auto t = summary_of({{"0.1", "0.1", "1", "-5", "-6"},
                             {"0.2", "0.1", "", "-5", "-6"},
                             {"0.1", "0.2", "0", "-5", "-6"},
                             {"0.2", "0.2", "0.5", "-5", "-6"}});
  PlotSpec ps;
  ps.metric = PlotMetric::Alpha;
  const auto svg = render_heatmap_svg(heatmap_grid(t, ps), ps);
  CHECK(count(svg, "fill=\"#bdbdbd\"") == 1);
  CHECK(count(svg, "value=undefined") == 1);
  // alpha = 1 is blue, 0 is red, 0.5 is white
  CHECK(heatmap_color(PlotMetric::Alpha, 1.0) == "#2166ac");
  CHECK(heatmap_color(PlotMetric::Alpha, 0.0) == "#b2182b");
  CHECK(heatmap_color(PlotMetric::Alpha, 0.5) == "#f7f7f7");
  CHECK(count(svg, "fill=\"#2166ac\"><title>") == 1);
  CHECK(count(svg, "fill=\"#b2182b\"><title>") == 1);
  CHECK(heatmap_color(PlotMetric::OmegaCross, 1.0) == "#08306b");
  CHECK(heatmap_color(PlotMetric::OmegaCross, 0.0) == "#ffffff");
}

TEST_CASE("log-evidence difference uses a symmetric domain") {
  const auto t = summary_of({{"0.1", "0.1", "1", "-5", "-6"}, {"0.2", "0.1", "1", "-5", "-3"}});
  PlotSpec ps;
  ps.metric = PlotMetric::LogEvidenceDiff;
  const auto g = heatmap_grid(t, ps);
  CHECK(g.values(0, 0) == -1.0);
  CHECK(g.values(0, 1) == 2.0);
  const auto svg = render_heatmap_svg(g, ps);
  CHECK(svg.find(">-2</text>") != std::string::npos);
  CHECK(svg.find(">2</text>") != std::string::npos);
  // dc - ndc < 0 (NDC preferred) is red
  CHECK(svg.find("fill=\"" + heatmap_color(ps.metric, 0.25) + "\"><title>lambda=0.1") != std::string::npos);
}

TEST_CASE("heatmap rejects non-rectangular and ambiguous input") {
  PlotSpec ps;
  CHECK_THROWS_AS(heatmap_grid(summary_of({{"0.1", "0.1", "1", "0", "0"},
                                           {"0.2", "0.1", "1", "0", "0"},
                                           {"0.1", "0.2", "1", "0", "0"}}),
                               ps),
                  InvalidArgument);
  CHECK_THROWS_AS(heatmap_grid(summary_of({{"0.1", "0.1", "1", "0", "0"}, {"0.1", "0.1", "1", "0", "0"}}), ps),
                  InvalidArgument);
  ps.variant = "dc";
  CHECK_THROWS_AS(heatmap_grid(summary_of({{"0.1", "0.1", "1", "0", "0"}}), ps), InvalidArgument);
  CHECK(parse_plot_metric("js_distance") == PlotMetric::JsDistance);
  CHECK_THROWS_AS(parse_plot_metric("omega"), InvalidArgument);
}
