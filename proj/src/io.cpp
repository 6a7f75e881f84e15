#include "scbm/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace scbm {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw InvalidArgument("header " + key + " must be true or false, got '" + v + "'");
}

long long parse_int(const std::string& s, const std::string& what) {
  long long x = 0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, x);
  if (ec != std::errc() || p != end) throw InvalidArgument("invalid " + what + " '" + s + "'");
  return x;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd json_matrix(const json& j, const std::string& what) {
  if (!j.is_array()) throw InvalidArgument(what + " must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (j[r].size() != static_cast<std::size_t>(cols)) throw InvalidArgument(what + " rows differ in length");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

double parse_double(const std::string& s) {
  const std::string t = trim(s);
  if (t == "nan") return std::nan("");
  if (t == "inf") return INFINITY;
  if (t == "-inf") return -INFINITY;
  double x = 0.0;
  const auto* end = t.data() + t.size();
  const auto [p, ec] = std::from_chars(t.data(), end, x);
  if (ec != std::errc() || p != end || t.empty()) throw InvalidArgument("invalid number '" + s + "'");
  return x;
}

void write_graph(std::ostream& os, const Graph& g) {
  os << "# n_nodes=" << g.num_nodes() << "\n";
  os << "# simple_mode=" << (g.mode().simple ? "true" : "false") << "\n";
  os << "# allow_self_loops=" << (g.mode().allow_self_loops ? "true" : "false") << "\n";
  for (const auto& e : g.edge_list()) os << e.u << '\t' << e.v << '\n';
}

Graph read_graph(std::istream& is) {
  std::string line;
  long long n = -1;
  GraphMode mode;
  std::vector<Edge> edges;
  std::size_t max_id = 0;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const std::string body = trim(t.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(body.substr(0, eq)), val = trim(body.substr(eq + 1));
      if (key == "n_nodes") n = parse_int(val, "n_nodes");
      else if (key == "simple_mode") mode.simple = parse_bool(key, val);
      else if (key == "allow_self_loops") mode.allow_self_loops = parse_bool(key, val);
      continue;
    }
    std::istringstream ss(t);
    std::string a, b, extra;
    if (!(ss >> a >> b) || (ss >> extra))
      throw InvalidArgument("graph line " + std::to_string(lineno) + ": expected two node ids, got '" + t + "'");
    const auto i = parse_int(a, "node id"), j = parse_int(b, "node id");
    if (i < 0 || j < 0) throw InvalidArgument("graph line " + std::to_string(lineno) + ": negative node id");
    edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j)});
    max_id = std::max({max_id, static_cast<std::size_t>(i) + 1, static_cast<std::size_t>(j) + 1});
  }
  if (n < 0) n = static_cast<long long>(max_id);
  return Graph::from_edges(static_cast<std::size_t>(n), edges, mode);
}

void write_partition(std::ostream& os, const Partition& p) {
  for (auto l : p.labels()) os << l << '\n';
}

Partition read_partition(std::istream& is) {
  std::ostringstream all;
  std::string line;
  while (std::getline(is, line)) {
    const auto hash = line.find('#');
    all << (hash == std::string::npos ? line : line.substr(0, hash)) << '\n';
  }
  std::string text = trim(all.str());
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') throw InvalidArgument("unterminated partition array");
    text = text.substr(1, text.size() - 2);
  }
  for (auto& ch : text)
    if (ch == ',') ch = ' ';
  std::istringstream ss(text);
  std::vector<Label> labels;
  std::string tok;
  while (ss >> tok) {
    const auto x = parse_int(tok, "partition label");
    if (x < 0) throw InvalidArgument("negative partition label " + tok);
    labels.push_back(static_cast<Label>(x));
  }
  if (labels.empty()) throw InvalidArgument("partition is empty");
  return Partition(std::move(labels));
}

std::string cross_spec_to_json(const CrossSpec& spec, const ResidualReport* residuals) {
  json j;
  j["method"] = spec.method;
  j["factor_block_counts"] = spec.index.factor_block_counts();
  json factors = json::array();
  for (const auto& f : spec.factors) factors.push_back(matrix_json(f.values()));
  j["factors"] = factors;
  j["cross_sizes"] = std::vector<double>(spec.cross_sizes.data(), spec.cross_sizes.data() + spec.cross_sizes.size());
  j["rho"] = spec.rho;
  j["theta"] = matrix_json(spec.theta.values());
  j["normalizers"] = matrix_json(spec.normalizers);
  if (residuals) {
    json r;
    r["max_abs"] = residuals->max_abs;
    r["max_rel"] = residuals->max_rel;
    json entries = json::array();
    for (const auto& e : residuals->entries)
      entries.push_back({{"factor", e.factor}, {"r", e.r}, {"s", e.s}, {"expected", e.expected}, {"actual", e.actual}});
    r["entries"] = entries;
    j["residuals"] = r;
  }
  return j.dump(2) + "\n";
}

CrossSpec cross_spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
    CrossSpec spec;
    spec.method = j.at("method").get<std::string>();
    spec.index = CrossIndex(j.at("factor_block_counts").get<std::vector<int>>());
    for (const auto& f : j.at("factors")) spec.factors.emplace_back(json_matrix(f, "factor matrix"));
    const auto sizes = j.at("cross_sizes").get<std::vector<double>>();
    spec.cross_sizes = Eigen::Map<const Eigen::VectorXd>(sizes.data(), static_cast<Eigen::Index>(sizes.size()));
    spec.rho = j.at("rho").get<double>();
    spec.theta = BlockMatrix(json_matrix(j.at("theta"), "theta"));
    spec.normalizers = json_matrix(j.at("normalizers"), "normalizers");
    if (static_cast<int>(spec.factors.size()) != spec.index.num_factors())
      throw InvalidArgument("factor count does not match factor_block_counts");
    if (spec.theta.dim() != spec.index.num_cross_blocks() || spec.cross_sizes.size() != spec.theta.dim())
      throw InvalidArgument("theta and cross_sizes must have one entry per cross block");
    return spec;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed cross spec: ") + e.what());
  }
}

std::string generation_report_to_json(const GenerationReport& r) {
  json j;
  j["requested_edges"] = r.requested_edges;
  j["shortfall_total"] = r.shortfall_total;
  json sf = json::array();
  for (const auto& s : r.shortfalls)
    sf.push_back({{"u", s.u}, {"v", s.v}, {"requested", s.requested}, {"dropped", s.dropped}});
  j["shortfalls"] = sf;
  j["rounding_deviation"] = r.rounding_deviation;
  j["capped_pairs"] = r.capped_pairs;
  j["total_pairs"] = r.total_pairs;
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

void write_posterior(std::ostream& os, const std::vector<PosteriorSample>& samples, std::uint64_t seed) {
  json meta;
  meta["variant"] = samples.empty() ? std::string("ndc") : to_string(samples.front().variant);
  meta["seed"] = seed;
  meta["n_samples"] = samples.size();
  std::vector<double> dl;
  std::vector<std::size_t> sweeps;
  for (const auto& s : samples) {
    dl.push_back(s.description_length);
    sweeps.push_back(s.sweep_index);
  }
  meta["description_lengths"] = dl;
  meta["sweep_indices"] = sweeps;
  os << "# " << meta.dump() << "\n";
  for (const auto& s : samples) {
    const auto l = s.partition.labels();
    for (std::size_t i = 0; i < l.size(); ++i) os << (i ? " " : "") << l[i];
    os << "\n";
  }
}

std::vector<PosteriorSample> read_posterior(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0) throw InvalidArgument("posterior file lacks its header");
  json meta;
  try {
    meta = json::parse(line.substr(2));
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed posterior header: ") + e.what());
  }
  const auto variant = parse_inference_variant(meta.value("variant", std::string("ndc")));
  const auto dl = meta.value("description_lengths", std::vector<double>{});
  const auto sweeps = meta.value("sweep_indices", std::vector<std::size_t>{});
  std::vector<PosteriorSample> out;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    std::istringstream ss(line);
    out.push_back({read_partition(ss), 0.0, variant, 0});
  }
  if (dl.size() != out.size() || sweeps.size() != out.size())
    throw InvalidArgument("posterior header lists " + std::to_string(dl.size()) + " samples, file has " +
                          std::to_string(out.size()));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].description_length = dl[i];
    out[i].sweep_index = sweeps[i];
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

Graph load_graph(const std::filesystem::path& path) {
  std::istringstream ss(read_text_file(path));
  return read_graph(ss);
}

void save_graph(const std::filesystem::path& path, const Graph& g) {
  std::ostringstream ss;
  write_graph(ss, g);
  write_text_file(path, ss.str());
}

Partition load_partition(const std::filesystem::path& path) {
  std::istringstream ss(read_text_file(path));
  return read_partition(ss);
}

void save_partition(const std::filesystem::path& path, const Partition& p) {
  std::ostringstream ss;
  write_partition(ss, p);
  write_text_file(path, ss.str());
}

}  // namespace scbm
