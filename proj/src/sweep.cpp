#include "scbm/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "scbm/cross_block.hpp"
#include "scbm/io.hpp"
#include "scbm/metrics.hpp"

namespace scbm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(trim(cur));
  return out;
}

double round12(double x) { return std::round(x * 1e12) / 1e12; }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string num(double x) { return format_double(x); }

std::string cell_prefix(double lambda, double mu, double c, GeneratorVariant g) {
  return num(lambda) + "," + num(mu) + "," + num(c) + "," + to_string(g);
}

std::string opt_num(const std::optional<double>& x) { return x ? num(*x) : std::string(); }

std::vector<double> values_of(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split(v, ',')) {
    if (s.empty()) continue;
    try {
      out.push_back(parse_double(s));
    } catch (const InvalidArgument&) {
      throw InvalidArgument("config key " + key + ": invalid number '" + s + "'");
    }
  }
  return out;
}

long long int_of(const std::string& key, const std::string& v) {
  const double x = parse_double(v);
  if (x != std::floor(x)) throw InvalidArgument("config key " + key + " must be an integer, got '" + v + "'");
  return static_cast<long long>(x);
}

SweepConfig profile_defaults(const std::string& name) {
  if (name == "full") return SweepConfig::full();
  if (name == "desk") return SweepConfig::desk();
  throw InvalidArgument("unknown profile '" + name + "' (expected full or desk)");
}

}  // namespace

std::vector<double> parse_range(const std::string& s) {
  const std::string t = trim(s);
  if (t.find(':') != std::string::npos) {
    const auto parts = split(t, ':');
    if (parts.size() != 3) throw InvalidArgument("range '" + s + "' must be lo:hi:step");
    const double lo = parse_double(parts[0]), hi = parse_double(parts[1]), step = parse_double(parts[2]);
    if (!(step > 0) || hi < lo) throw InvalidArgument("range '" + s + "' needs step > 0 and hi >= lo");
    std::vector<double> out;
    const auto n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
    for (long long i = 0; i <= n; ++i) out.push_back(round12(lo + double(i) * step));
    return out;
  }
  auto out = values_of("range", t);
  if (out.empty()) throw InvalidArgument("empty range '" + s + "'");
  return out;
}

SweepConfig SweepConfig::full() {
  SweepConfig c;
  c.mu_values = c.lambda_values = parse_range("0.01:0.50:0.01");
  c.profile = "full";
  return c;
}

SweepConfig SweepConfig::desk() {
  SweepConfig c;
  c.mu_values = c.lambda_values = parse_range("0.05:0.50:0.05");
  c.replicas = 2;
  c.samples_per_graph = 10;
  c.profile = "desk";
  return c;
}

void SweepConfig::validate() const {
  if (!(n_nodes >= 4) || std::fmod(n_nodes, 4.0) != 0.0)
    throw InvalidArgument("N must be a positive multiple of 4, got " + num(n_nodes));
  if (c_list.empty() || mu_values.empty() || lambda_values.empty() || generators.empty() || variants.empty() ||
      omega_thresholds.empty())
    throw InvalidArgument("sweep lists must not be empty");
  for (double c : c_list)
    if (!(c > 0)) throw InvalidArgument("expected degree must be positive, got " + num(c));
  for (const auto* vals : {&mu_values, &lambda_values})
    for (double v : *vals)
      if (!(v > 0 && v < 1)) throw InvalidArgument("grid values must lie in (0, 1), got " + num(v));
  for (double t : omega_thresholds)
    if (!(t > 0 && t <= 1)) throw InvalidArgument("omega thresholds must lie in (0, 1], got " + num(t));
  if (replicas < 1) throw InvalidArgument("replicas must be >= 1");
  if (samples_per_graph < 1) throw InvalidArgument("samples_per_graph must be >= 1");
  if (sweeps_between_samples < 1) throw InvalidArgument("sweeps_between_samples must be >= 1");
  if (k_max < 0) throw InvalidArgument("k_max must be >= 0");
}

void apply_sweep_option(SweepConfig& cfg, const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "profile") {
    const auto base = profile_defaults(v);
    cfg.mu_values = base.mu_values;
    cfg.lambda_values = base.lambda_values;
    cfg.replicas = base.replicas;
    cfg.samples_per_graph = base.samples_per_graph;
    cfg.profile = base.profile;
  } else if (key == "N") {
    cfg.n_nodes = parse_double(v);
  } else if (key == "c_list") {
    cfg.c_list = values_of(key, v);
  } else if (key == "mu_range") {
    cfg.mu_values = parse_range(v);
  } else if (key == "lambda_range") {
    cfg.lambda_values = parse_range(v);
  } else if (key == "replicas") {
    cfg.replicas = static_cast<int>(int_of(key, v));
  } else if (key == "samples_per_graph") {
    cfg.samples_per_graph = static_cast<std::size_t>(std::max(0LL, int_of(key, v)));
  } else if (key == "generators") {
    cfg.generators.clear();
    for (const auto& s : split(v, ',')) cfg.generators.push_back(parse_generator_variant(s));
  } else if (key == "variants") {
    cfg.variants.clear();
    for (const auto& s : split(v, ',')) cfg.variants.push_back(parse_inference_variant(s));
  } else if (key == "omega_thresholds") {
    cfg.omega_thresholds = values_of(key, v);
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(int_of(key, v));
  } else if (key == "burn_in_sweeps") {
    cfg.burn_in_sweeps = static_cast<std::size_t>(std::max(0LL, int_of(key, v)));
  } else if (key == "sweeps_between_samples") {
    cfg.sweeps_between_samples = static_cast<std::size_t>(std::max(0LL, int_of(key, v)));
  } else if (key == "k_max") {
    cfg.k_max = static_cast<int>(int_of(key, v));
  } else if (key == "gamma") {
    cfg.gamma = parse_double(v);
  } else {
    throw InvalidArgument("unknown config key '" + key + "'");
  }
}

SweepConfig parse_sweep_config(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> kv;
  std::istringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string t = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key=value, got '" + t + "'");
    kv.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  SweepConfig cfg = SweepConfig::full();
  for (const auto& [k, v] : kv)
    if (k == "profile") apply_sweep_option(cfg, k, v);
  for (const auto& [k, v] : kv)
    if (k != "profile") apply_sweep_option(cfg, k, v);
  return cfg;
}

const VariantSummary* CellResult::find(InferenceVariant v) const {
  for (const auto& s : variants)
    if (s.variant == v) return &s;
  return nullptr;
}

Coexistence coexistence_fraction(const std::vector<SampleRecord>& samples, InferenceVariant variant, double omega_t) {
  Coexistence out;
  for (const auto& s : samples) {
    if (s.variant != variant) continue;
    out.q1 += s.omega_p1 >= omega_t;
    out.q2 += s.omega_p2 >= omega_t;
  }
  if (out.q1 + out.q2 > 0) out.alpha = double(out.q1) / double(out.q1 + out.q2);
  return out;
}

Coexistence coexistence_fraction(const CellResult& cell, InferenceVariant variant, double omega_t) {
  return coexistence_fraction(cell.samples, variant, omega_t);
}

std::uint64_t cell_seed(std::uint64_t base, double lambda, double mu, double c, GeneratorVariant g, int replica) {
  return mix_seed({base, std::bit_cast<std::uint64_t>(lambda), std::bit_cast<std::uint64_t>(mu),
                   std::bit_cast<std::uint64_t>(c), static_cast<std::uint64_t>(g),
                   static_cast<std::uint64_t>(replica)});
}

CellResult run_cell(double lambda, double mu, double c, GeneratorVariant generator, const SweepConfig& cfg) {
  CellResult out;
  out.lambda = lambda;
  out.mu = mu;
  out.c = c;
  out.generator = generator;
  const std::string where = "cell (lambda=" + num(lambda) + ", mu=" + num(mu) + ", c=" + num(c) +
                            ", generator=" + to_string(generator) + "): ";
  try {
    const double n_nodes = cfg.n_nodes, n_edges = c * n_nodes / 2;
    const double beta = factor_beta(n_edges, n_nodes / 2), rho = density(n_nodes, n_edges);
    const auto theta1 = make_theta_bicommunity(mu, beta);
    const auto theta2 = make_theta_coreperiphery(lambda, beta);
    const auto spec = cross_block_matrix_equal(theta1, theta2, rho, n_nodes);
    const auto planted1 = expected_factor_counts(theta1, spec.factor_sizes(0));
    const auto planted2 = expected_factor_counts(theta2, spec.factor_sizes(1));

    for (auto v : cfg.variants) out.variants.push_back({v, 0, 0, 0, {}, 0});
    for (int rep = 0; rep < cfg.replicas; ++rep) {
      const auto seed = cell_seed(cfg.seed, lambda, mu, c, generator, rep);
      GeneratorConfig gc;
      gc.variant = generator;
      gc.gamma = cfg.gamma;
      const auto gg = generate_graph(spec, gc, seed);
      const auto p1 = project_partition(gg.cross, spec.index, 0);
      const auto p2 = project_partition(gg.cross, spec.index, 1);
      out.degree_variance += normalized_degree_variance(gg.graph);
      out.js_distance += js_distance_degree_distributions(gg.graph, p2);
      out.frob_dev_p1 += frobenius_deviation(planted1, realized_block_matrix(gg.graph, p1));
      out.frob_dev_p2 += frobenius_deviation(planted2, realized_block_matrix(gg.graph, p2));

      for (auto& vs : out.variants) {
        McmcConfig mc;
        mc.n_samples = cfg.samples_per_graph;
        mc.burn_in_sweeps = cfg.burn_in_sweeps;
        mc.sweeps_between_samples = cfg.sweeps_between_samples;
        mc.k_max = cfg.k_max;
        mc.seed = mix_seed({seed, 0x696e66ULL, static_cast<std::uint64_t>(vs.variant)});
        const auto samples = sample_posterior(gg.graph, vs.variant, mc);
        vs.log_evidence += log_evidence(samples);
        for (std::size_t i = 0; i < samples.size(); ++i) {
          const auto& p = samples[i].partition;
          out.samples.push_back({vs.variant, rep, i, partition_overlap(gg.cross, p).omega,
                                 partition_overlap(p1, p).omega, partition_overlap(p2, p).omega,
                                 samples[i].description_length, p.num_blocks()});
        }
      }
    }
    const double reps = double(cfg.replicas);
    out.degree_variance /= reps;
    out.js_distance /= reps;
    out.frob_dev_p1 /= reps;
    out.frob_dev_p2 /= reps;
    for (auto& vs : out.variants) {
      vs.log_evidence /= reps;
      std::size_t count = 0;
      for (const auto& s : out.samples) {
        if (s.variant != vs.variant) continue;
        vs.mean_omega_cross += s.omega_cross;
        vs.mean_omega_p1 += s.omega_p1;
        vs.mean_omega_p2 += s.omega_p2;
        ++count;
      }
      vs.mean_omega_cross /= double(count);
      vs.mean_omega_p1 /= double(count);
      vs.mean_omega_p2 /= double(count);
      for (double t : cfg.omega_thresholds) vs.coexistence.push_back(coexistence_fraction(out.samples, vs.variant, t));
    }
  } catch (const GenerationFailure& e) {
    throw GenerationFailure(where + e.what());
  } catch (const InfeasibleConstruction& e) {
    throw InfeasibleConstruction(where + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(where + e.what());
  } catch (const Error& e) {
    throw Error(where + e.what());
  }
  return out;
}

std::vector<CellKey> grid_cells(const SweepConfig& cfg) {
  std::vector<CellKey> out;
  for (double c : cfg.c_list)
    for (auto g : cfg.generators)
      for (double mu : cfg.mu_values)
        for (double lambda : cfg.lambda_values) out.push_back({lambda, mu, c, g});
  return out;
}

std::string results_header() {
  return "lambda,mu,c,generator,variant,replica,sample_index,omega_cross,omega_p1,omega_p2,dl,inferred_k\n";
}

std::string summary_header(const std::vector<double>& omega_thresholds) {
  std::string h = "lambda,mu,c,generator,variant,mean_omega_cross,mean_omega_p1,mean_omega_p2";
  for (double t : omega_thresholds) h += ",alpha_" + num(t);
  return h + ",log_evidence_ndc,log_evidence_dc,degree_variance,js_distance,frob_dev_p1,frob_dev_p2,rmi,status\n";
}

std::string results_rows(const CellResult& cell) {
  const std::string prefix = cell_prefix(cell.lambda, cell.mu, cell.c, cell.generator);
  std::string out;
  for (const auto& s : cell.samples) {
    out += prefix + "," + to_string(s.variant) + "," + std::to_string(s.replica) + "," +
           std::to_string(s.sample_index) + "," + num(s.omega_cross) + "," + num(s.omega_p1) + "," +
           num(s.omega_p2) + "," + num(s.dl) + "," + std::to_string(s.inferred_k) + "\n";
  }
  return out;
}

std::string summary_rows(const CellResult& cell, const std::vector<double>& omega_thresholds) {
  const std::string prefix = cell_prefix(cell.lambda, cell.mu, cell.c, cell.generator);
  const bool ok = cell.status == "ok";
  std::string evidence;
  for (auto v : {InferenceVariant::Ndc, InferenceVariant::Dc}) {
    const auto* s = cell.find(v);
    evidence += "," + (ok && s ? num(s->log_evidence) : std::string());
  }
  std::string diag = ok ? "," + num(cell.degree_variance) + "," + num(cell.js_distance) + "," +
                              num(cell.frob_dev_p1) + "," + num(cell.frob_dev_p2)
                        : std::string(",,,,");
  std::string out;
  for (const auto& s : cell.variants) {
    out += prefix + "," + to_string(s.variant);
    if (ok) {
      out += "," + num(s.mean_omega_cross) + "," + num(s.mean_omega_p1) + "," + num(s.mean_omega_p2);
      for (std::size_t i = 0; i < omega_thresholds.size(); ++i)
        out += "," + (i < s.coexistence.size() ? opt_num(s.coexistence[i].alpha) : std::string());
    } else {
      out += ",,,";
      out += std::string(omega_thresholds.size(), ',');
    }
    out += evidence + diag + ",," + csv_field(cell.status) + "\n";
  }
  return out;
}

std::string grid_metadata_json(const SweepConfig& cfg) {
  nlohmann::ordered_json j;
  j["profile"] = cfg.profile;
  j["N"] = cfg.n_nodes;
  j["c_list"] = cfg.c_list;
  j["lambda_values"] = cfg.lambda_values;
  j["mu_values"] = cfg.mu_values;
  j["replicas"] = cfg.replicas;
  j["samples_per_graph"] = cfg.samples_per_graph;
  std::vector<std::string> gens, vars;
  for (auto g : cfg.generators) gens.push_back(to_string(g));
  for (auto v : cfg.variants) vars.push_back(to_string(v));
  j["generators"] = gens;
  j["variants"] = vars;
  j["omega_thresholds"] = cfg.omega_thresholds;
  j["seed"] = cfg.seed;
  j["burn_in_sweeps"] = cfg.burn_in_sweeps;
  j["sweeps_between_samples"] = cfg.sweeps_between_samples;
  j["k_max"] = cfg.k_max;
  j["gamma"] = cfg.gamma;
  j["order"] = "c, generator, mu, lambda (lambda fastest)";
  j["results_columns"] = split(trim(results_header()), ',');
  j["summary_columns"] = split(trim(summary_header(cfg.omega_thresholds)), ',');
  return j.dump(2) + "\n";
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InvalidArgument("CSV lacks column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
      continue;
    }
    if (ch == '"') {
      quoted = any = true;
    } else if (ch == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (ch == '\n') {
      if (any || !field.empty()) {
        if (!field.empty() && field.back() == '\r') field.pop_back();
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += ch;
      any = true;
    }
  }
  if (quoted) throw InvalidArgument("CSV ends inside a quoted field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidArgument("CSV has no header row");
  CsvTable t;
  t.header = std::move(rows.front());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != t.header.size())
      throw InvalidArgument("CSV row " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                            " fields, header has " + std::to_string(t.header.size()));
    t.rows.push_back(std::move(rows[r]));
  }
  return t;
}

std::string analyze_results(const CsvTable& results, const std::vector<double>& omega_thresholds,
                            const CsvTable* summary) {
  const std::size_t lam = results.column("lambda"), mu = results.column("mu"), c = results.column("c"),
                    gen = results.column("generator"), var = results.column("variant"),
                    oc = results.column("omega_cross"), o1 = results.column("omega_p1"),
                    o2 = results.column("omega_p2");
  struct Group {
    std::vector<std::string> key;  // lambda, mu, c, generator, variant
    std::vector<SampleRecord> samples;
  };
  std::vector<Group> groups;
  std::map<std::vector<std::string>, std::size_t> index;
  for (const auto& row : results.rows) {
    std::vector<std::string> key{row[lam], row[mu], row[c], row[gen], row[var]};
    auto [it, fresh] = index.emplace(key, groups.size());
    if (fresh) groups.push_back({key, {}});
    SampleRecord s;
    s.variant = parse_inference_variant(row[var]);
    s.omega_cross = parse_double(row[oc]);
    s.omega_p1 = parse_double(row[o1]);
    s.omega_p2 = parse_double(row[o2]);
    groups[it->second].samples.push_back(s);
  }

  const std::vector<std::string> carried{"log_evidence_ndc", "log_evidence_dc", "degree_variance", "js_distance",
                                         "frob_dev_p1",      "frob_dev_p2",     "rmi",             "status"};
  std::map<std::vector<std::string>, std::vector<std::string>> extra;
  if (summary) {
    std::vector<std::size_t> cols;
    for (const auto& name : carried) cols.push_back(summary->column(name));
    const std::size_t sl = summary->column("lambda"), sm = summary->column("mu"), sc = summary->column("c"),
                      sg = summary->column("generator"), sv = summary->column("variant");
    for (const auto& row : summary->rows) {
      std::vector<std::string> vals;
      for (auto k : cols) vals.push_back(row[k]);
      extra[{row[sl], row[sm], row[sc], row[sg], row[sv]}] = vals;
    }
  }

  std::string out = summary_header(omega_thresholds);
  for (const auto& g : groups) {
    double mc = 0, m1 = 0, m2 = 0;
    for (const auto& s : g.samples) {
      mc += s.omega_cross;
      m1 += s.omega_p1;
      m2 += s.omega_p2;
    }
    const double n = double(g.samples.size());
    out += g.key[0] + "," + g.key[1] + "," + g.key[2] + "," + g.key[3] + "," + g.key[4] + "," + num(mc / n) + "," +
           num(m1 / n) + "," + num(m2 / n);
    const auto v = g.samples.front().variant;
    for (double t : omega_thresholds) out += "," + opt_num(coexistence_fraction(g.samples, v, t).alpha);
    const auto it = extra.find(g.key);
    if (it != extra.end()) {
      for (std::size_t k = 0; k < it->second.size(); ++k) out += "," + csv_field(it->second[k]);
    } else {
      out += ",,,,,,,,ok";
    }
    out += "\n";
  }
  return out;
}

GridSummary run_grid(const SweepConfig& cfg, const std::filesystem::path& out_dir, int jobs, bool resume,
                     const std::function<void(const CellResult&)>& on_cell) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  const auto results_path = out_dir / "results.csv", summary_path = out_dir / "summary.csv",
             meta_path = out_dir / "grid.json";
  const std::string meta = grid_metadata_json(cfg);
  const auto cells = grid_cells(cfg);

  // Rows of cells already complete, keyed by their leading four fields.
  std::map<std::string, std::pair<std::string, std::string>> cached;
  if (resume && std::filesystem::exists(summary_path)) {
    if (!std::filesystem::exists(meta_path) || read_text_file(meta_path) != meta)
      throw InvalidArgument("cannot resume: " + meta_path.string() + " does not match this configuration");
    const auto key_of = [](const std::string& line) {
      std::size_t pos = 0;
      for (int k = 0; k < 4 && pos != std::string::npos; ++k) pos = line.find(',', pos + (k ? 1 : 0));
      return pos == std::string::npos ? line : line.substr(0, pos);
    };
    std::map<std::string, std::size_t> summary_count;
    {
      std::istringstream ss(read_text_file(summary_path));
      std::string line;
      std::getline(ss, line);
      while (std::getline(ss, line)) {
        if (line.empty()) continue;
        cached[key_of(line)].second += line + "\n";
        ++summary_count[key_of(line)];
      }
    }
    std::map<std::string, std::size_t> result_count;
    if (std::filesystem::exists(results_path)) {
      std::istringstream ss(read_text_file(results_path));
      std::string line;
      std::getline(ss, line);
      while (std::getline(ss, line)) {
        const auto it = cached.find(key_of(line));
        if (it == cached.end()) continue;
        it->second.first += line + "\n";
        ++result_count[it->first];
      }
    }
    // A cell is kept only with all its summary rows and, unless failed, all its sample rows.
    const std::size_t rows_per_cell =
        static_cast<std::size_t>(cfg.replicas) * cfg.samples_per_graph * cfg.variants.size();
    for (auto it = cached.begin(); it != cached.end();) {
      const bool failed = it->second.second.find("failed: ") != std::string::npos;
      const bool complete = summary_count[it->first] == cfg.variants.size() &&
                            result_count[it->first] == (failed ? 0 : rows_per_cell);
      it = complete ? std::next(it) : cached.erase(it);
    }
  }

  write_text_file(meta_path, meta);
  std::ofstream results(results_path, std::ios::binary | std::ios::trunc),
      summary(summary_path, std::ios::binary | std::ios::trunc);
  if (!results || !summary) throw Error("cannot write results into " + out_dir.string());
  results << results_header();
  summary << summary_header(cfg.omega_thresholds);

  GridSummary gs;
  gs.cells = cells.size();
  std::vector<const std::pair<std::string, std::string>*> done(cells.size(), nullptr);
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& k = cells[i];
    const auto it = cached.find(cell_prefix(k.lambda, k.mu, k.c, k.generator));
    if (it != cached.end()) {
      done[i] = &it->second;
      ++gs.skipped;
    } else {
      todo.push_back(i);
    }
  }

  std::mutex mutex;
  std::map<std::size_t, std::pair<std::string, std::string>> ready;
  std::size_t next_emit = 0;
  const auto emit = [&] {
    while (next_emit < cells.size()) {
      const std::pair<std::string, std::string>* block = done[next_emit];
      auto it = ready.find(next_emit);
      if (!block && it == ready.end()) break;
      if (!block) block = &it->second;
      results << block->first;
      results.flush();
      summary << block->second;
      summary.flush();
      if (it != ready.end()) ready.erase(it);
      ++next_emit;
    }
  };
  {
    std::lock_guard lock(mutex);
    emit();
  }

  std::atomic<std::size_t> cursor{0};
  const auto worker = [&] {
    for (;;) {
      const std::size_t t = cursor.fetch_add(1);
      if (t >= todo.size()) return;
      const auto& k = cells[todo[t]];
      CellResult cell;
      try {
        cell = run_cell(k.lambda, k.mu, k.c, k.generator, cfg);
      } catch (const std::exception& e) {
        cell = {};
        cell.lambda = k.lambda;
        cell.mu = k.mu;
        cell.c = k.c;
        cell.generator = k.generator;
        for (auto v : cfg.variants) cell.variants.push_back({v, 0, 0, 0, {}, 0});
        cell.status = std::string("failed: ") + e.what();
      }
      auto block = std::make_pair(results_rows(cell), summary_rows(cell, cfg.omega_thresholds));
      std::lock_guard lock(mutex);
      if (cell.status != "ok") ++gs.failed;
      ready.emplace(todo[t], std::move(block));
      emit();
      if (on_cell) on_cell(cell);
    }
  };
  const int n_threads =
      std::max(1, std::min<int>(jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency()),
                                static_cast<int>(std::max<std::size_t>(todo.size(), 1))));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (!results || !summary) throw Error("write failed in " + out_dir.string());
  for (const auto& [key, block] : cached)
    if (block.second.find("failed: ") != std::string::npos) ++gs.failed;
  return gs;
}

}  // namespace scbm
