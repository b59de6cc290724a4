#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <tuple>
#include <variant>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gcnabft/fault_lab.hpp"
#include "gcnabft/graph.hpp"

namespace gcnabft {

// Text formats, all UTF-8, LF or CRLF:
//   graph:  "u v" edge per line, 0-based, '#' comments, optional "n <count>"
//           header overriding the node count
//   dense:  CSV of reals, one row per line
//   sparse: "rows cols nnz" header, then "i j v" triplets
//   labels: one integer per line
//   config: flat "key = value", '#' comments, unknown keys rejected

namespace ioutil {

inline std::string strip(std::string s) {
  const char* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::string strip_comment(const std::string& s) {
  const auto pos = s.find('#');
  return pos == std::string::npos ? s : s.substr(0, pos);
}

inline double parse_real(const std::string& token, std::size_t line_no) {
  const std::string t = strip(token);
  if (t.empty()) throw ParseError(line_no, "empty numeric field");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size())
    throw ParseError(line_no, "not a number: '" + t + "'");
  return v;
}

inline std::uint64_t parse_index(const std::string& token,
                                 std::size_t line_no) {
  const std::string t = strip(token);
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
    throw ParseError(line_no, "not an index: '" + t + "'");
  return std::stoull(t);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace ioutil

// ---------------------------------------------------------------------------
// Graph files

inline Graph load_graph(const std::string& path) {
  auto in = ioutil::open_input(path);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::optional<std::size_t> declared_nodes;
  std::size_t max_index = 0;
  bool any_index = false;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = ioutil::strip(ioutil::strip_comment(raw));
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string a, b, extra;
    fields >> a;
    if (a == "n") {
      if (!(fields >> b) || (fields >> extra))
        throw ParseError(line_no, "header must be 'n <count>'");
      declared_nodes = ioutil::parse_index(b, line_no);
      continue;
    }
    if (!(fields >> b) || (fields >> extra))
      throw ParseError(line_no, "expected 'u v'");
    const std::size_t u = ioutil::parse_index(a, line_no);
    const std::size_t v = ioutil::parse_index(b, line_no);
    edges.emplace_back(u, v);
    max_index = std::max({max_index, u, v});
    any_index = true;
  }

  const std::size_t n =
      declared_nodes ? *declared_nodes : (any_index ? max_index + 1 : 0);
  if (n == 0) throw ParseError(line_no, "graph has no nodes");
  return Graph::from_edges(n, std::move(edges));
}

inline void write_graph(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "n " << g.num_nodes << "\n";
  for (const auto& [u, v] : g.edges) out << u << " " << v << "\n";
}

// ---------------------------------------------------------------------------
// Matrix files

inline DenseMatrix load_dense_matrix(const std::string& path) {
  auto in = ioutil::open_input(path);
  std::vector<std::vector<double>> rows;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = ioutil::strip(ioutil::strip_comment(raw));
    if (line.empty()) continue;
    std::vector<double> row;
    for (const std::string& field : ioutil::split(line, ','))
      row.push_back(ioutil::parse_real(field, line_no));
    if (!rows.empty() && row.size() != rows.front().size())
      throw ShapeInconsistent(path + ": ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(line_no, "empty dense matrix");
  DenseMatrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

inline void write_dense_matrix(const DenseMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ",";
      out << ioutil::format_real(m(i, j));
    }
    out << "\n";
  }
}

inline SparseMatrix load_sparse_matrix(const std::string& path) {
  auto in = ioutil::open_input(path);
  std::string raw;
  std::size_t line_no = 0;
  std::optional<std::array<std::uint64_t, 3>> header;
  std::vector<std::tuple<std::size_t, std::size_t, double>> triplets;

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = ioutil::strip(ioutil::strip_comment(raw));
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string a, b, c, extra;
    if (!(fields >> a >> b >> c) || (fields >> extra))
      throw ParseError(line_no, "expected three fields");
    if (!header) {
      header = {ioutil::parse_index(a, line_no),
                ioutil::parse_index(b, line_no),
                ioutil::parse_index(c, line_no)};
      continue;
    }
    const std::size_t i = ioutil::parse_index(a, line_no);
    const std::size_t j = ioutil::parse_index(b, line_no);
    const double v = ioutil::parse_real(c, line_no);
    if (v == 0.0) throw ExplicitZero(path + ": explicit zero value");
    triplets.emplace_back(i, j, v);
  }
  if (!header) throw ParseError(line_no, "missing 'rows cols nnz' header");
  if (triplets.size() != (*header)[2])
    throw ShapeInconsistent(path + ": nnz does not match header");
  return SparseMatrix::from_triplets((*header)[0], (*header)[1],
                                     std::move(triplets));
}

inline void write_sparse_matrix(const SparseMatrix& m,
                                const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << m.rows() << " " << m.cols() << " " << m.nnz() << "\n";
  const auto& off = m.row_offsets();
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t k = off[i]; k < off[i + 1]; ++k)
      out << i << " " << m.col_indices()[k] << " "
          << ioutil::format_real(m.values()[k]) << "\n";
}

enum class MatrixKind { Dense, Sparse };

inline std::variant<DenseMatrix, SparseMatrix> load_matrix(
    const std::string& path, MatrixKind kind) {
  if (kind == MatrixKind::Dense) return load_dense_matrix(path);
  return load_sparse_matrix(path);
}

inline std::vector<std::size_t> load_labels(const std::string& path) {
  auto in = ioutil::open_input(path);
  std::vector<std::size_t> labels;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = ioutil::strip(ioutil::strip_comment(raw));
    if (line.empty()) continue;
    labels.push_back(ioutil::parse_index(line, line_no));
  }
  return labels;
}

// ---------------------------------------------------------------------------
// Dataset bundle and synthetic instances

struct DatasetBundle {
  Graph graph;
  std::optional<SparseMatrix> sparse_features;
  std::optional<DenseMatrix> dense_features;
  std::vector<DenseMatrix> weights;
  std::vector<std::optional<DenseMatrix>> weight_checksum_overrides;
  std::optional<std::vector<std::size_t>> golden_labels;
  std::string name;

  std::size_t feature_rows() const {
    return sparse_features ? sparse_features->rows() : dense_features->rows();
  }

  void validate() const {
    if (!sparse_features && !dense_features)
      throw ShapeInconsistent("bundle has no features");
    if (feature_rows() != graph.num_nodes)
      throw ShapeInconsistent("feature rows != graph nodes");
    std::size_t width =
        sparse_features ? sparse_features->cols() : dense_features->cols();
    for (const auto& w : weights) {
      if (w.rows() != width) throw ShapeInconsistent("weight chain broken");
      width = w.cols();
    }
    if (golden_labels && golden_labels->size() != graph.num_nodes)
      throw ShapeInconsistent("label count != graph nodes");
  }
};

struct SyntheticSpec {
  std::size_t num_nodes = 0;
  double edge_probability = 0.0;
  std::size_t feature_dim = 0;
  double feature_density = 0.0;
  std::vector<std::size_t> hidden_dims;
  std::size_t num_classes = 0;
  std::uint64_t seed = 0;

  void validate() const {
    if (num_nodes < 1 || feature_dim < 1 || num_classes < 1)
      throw DimensionMismatch("synthetic: dimensions must be >= 1");
    for (std::size_t h : hidden_dims)
      if (h < 1) throw DimensionMismatch("synthetic: hidden dims must be >= 1");
    if (!(edge_probability > 0.0) || edge_probability > 1.0)
      throw DimensionMismatch("synthetic: edge_probability must be in (0,1]");
    if (!(feature_density > 0.0) || feature_density > 1.0)
      throw DimensionMismatch("synthetic: feature_density must be in (0,1]");
  }
};

// Erdos-Renyi graph, sparse features in [-1,1], Glorot-range uniform weights
// so layer outputs stay near unit scale. Fully determined by the seed via
// fixed substreams.
inline DatasetBundle generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  DatasetBundle bundle;
  bundle.name = "synthetic-" + std::to_string(spec.seed);

  Rng graph_rng(spec.seed, 1);
  bundle.graph.num_nodes = spec.num_nodes;
  for (std::size_t u = 0; u < spec.num_nodes; ++u)
    for (std::size_t v = u + 1; v < spec.num_nodes; ++v)
      if (graph_rng.uniform01() < spec.edge_probability)
        bundle.graph.edges.emplace_back(u, v);

  Rng feature_rng(spec.seed, 2);
  std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
  for (std::size_t i = 0; i < spec.num_nodes; ++i)
    for (std::size_t j = 0; j < spec.feature_dim; ++j)
      if (feature_rng.uniform01() < spec.feature_density) {
        double v = feature_rng.uniform(-1.0, 1.0);
        if (v == 0.0) v = 0.5;
        trip.emplace_back(i, j, v);
      }
  bundle.sparse_features = SparseMatrix::from_triplets(
      spec.num_nodes, spec.feature_dim, std::move(trip));

  std::vector<std::size_t> dims;
  dims.push_back(spec.feature_dim);
  dims.insert(dims.end(), spec.hidden_dims.begin(), spec.hidden_dims.end());
  dims.push_back(spec.num_classes);
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    Rng w_rng(spec.seed, 16 + k);
    const double scale =
        std::sqrt(6.0 / static_cast<double>(dims[k] + dims[k + 1]));
    DenseMatrix w(dims[k], dims[k + 1]);
    for (double& v : w.data()) v = w_rng.uniform(-scale, scale);
    bundle.weights.push_back(std::move(w));
  }
  bundle.weight_checksum_overrides.assign(bundle.weights.size(), std::nullopt);
  bundle.validate();
  return bundle;
}

// ---------------------------------------------------------------------------
// Run configuration

enum class FeatureRep { Sparse, Dense };

struct FileSource {
  std::string graph;
  std::string features;
  MatrixKind features_kind = MatrixKind::Sparse;
  std::vector<std::string> weights;
  std::vector<std::string> weight_checksums;
  std::string labels;
};

struct RunConfig {
  CampaignConfig campaign;
  double tau = 1e-7;  // single-threshold commands (check)
  FeatureRep feature_rep = FeatureRep::Sparse;
  std::optional<SyntheticSpec> synthetic;
  std::optional<FileSource> files;
};

namespace detail {

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigTypeError(key + ": expected boolean, got '" + v + "'");
}

inline std::uint64_t parse_u64(const std::string& v, const std::string& key) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigTypeError(key + ": expected unsigned integer, got '" + v + "'");
  return std::stoull(v);
}

inline double parse_f64(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const double r = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size())
    throw ConfigTypeError(key + ": expected real, got '" + v + "'");
  return r;
}

}  // namespace detail

inline RunConfig load_config(const std::string& path) {
  auto in = ioutil::open_input(path);
  std::map<std::string, std::string> kv;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = ioutil::strip(ioutil::strip_comment(raw));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(line_no, "expected 'key = value'");
    const std::string key = ioutil::strip(line.substr(0, eq));
    const std::string value = ioutil::strip(line.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "empty key");
    if (kv.count(key)) throw ParseError(line_no, "duplicate key '" + key + "'");
    kv[key] = value;
  }

  static const std::vector<std::string> known = {
      "trials", "master_seed", "thresholds", "checkers", "faults_per_trial",
      "jobs", "output_compare", "output_tau", "tau", "feature_rep",
      "synthetic", "num_nodes", "edge_probability", "feature_dim",
      "feature_density", "hidden_dims", "num_classes", "seed",
      "graph", "features", "features_kind", "weights", "weight_checksums",
      "labels"};
  for (const auto& [key, value] : kv) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw UnknownKey("unknown config key '" + key + "'");
  }

  auto get = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };

  RunConfig cfg;
  if (auto v = get("trials")) cfg.campaign.trials = detail::parse_u64(*v, "trials");
  if (auto v = get("master_seed"))
    cfg.campaign.master_seed = detail::parse_u64(*v, "master_seed");
  if (auto v = get("faults_per_trial"))
    cfg.campaign.faults_per_trial = detail::parse_u64(*v, "faults_per_trial");
  if (auto v = get("jobs")) cfg.campaign.jobs = detail::parse_u64(*v, "jobs");
  if (auto v = get("tau")) cfg.tau = detail::parse_f64(*v, "tau");
  if (auto v = get("output_tau"))
    cfg.campaign.output_tau = detail::parse_f64(*v, "output_tau");

  cfg.campaign.thresholds = {1e-4, 1e-5, 1e-6, 1e-7};
  if (auto v = get("thresholds")) {
    cfg.campaign.thresholds.clear();
    for (const std::string& t : ioutil::split(*v, ','))
      cfg.campaign.thresholds.push_back(
          detail::parse_f64(ioutil::strip(t), "thresholds"));
  }

  cfg.campaign.checkers = {CheckerKind::Split, CheckerKind::Fused};
  if (auto v = get("checkers")) {
    if (*v == "split")
      cfg.campaign.checkers = {CheckerKind::Split};
    else if (*v == "fused")
      cfg.campaign.checkers = {CheckerKind::Fused};
    else if (*v == "both")
      cfg.campaign.checkers = {CheckerKind::Split, CheckerKind::Fused};
    else
      throw ConfigTypeError("checkers: expected split|fused|both, got '" + *v +
                            "'");
  }

  if (auto v = get("output_compare")) {
    if (*v == "threshold")
      cfg.campaign.output_compare = OutputComparePolicy::AbsoluteThreshold;
    else if (*v == "bitexact")
      cfg.campaign.output_compare = OutputComparePolicy::BitExact;
    else
      throw ConfigTypeError("output_compare: expected threshold|bitexact");
  }

  if (auto v = get("feature_rep")) {
    if (*v == "sparse") cfg.feature_rep = FeatureRep::Sparse;
    else if (*v == "dense") cfg.feature_rep = FeatureRep::Dense;
    else throw ConfigTypeError("feature_rep: expected sparse|dense");
  }

  const bool synthetic = get("synthetic") ? detail::parse_bool(*get("synthetic"), "synthetic")
                                          : !get("graph").has_value();
  if (synthetic) {
    SyntheticSpec spec;
    auto need = [&](const char* key) -> std::string {
      auto v = get(key);
      if (!v) throw MissingKey(std::string("missing key '") + key + "'");
      return *v;
    };
    spec.num_nodes = detail::parse_u64(need("num_nodes"), "num_nodes");
    spec.edge_probability =
        detail::parse_f64(need("edge_probability"), "edge_probability");
    spec.feature_dim = detail::parse_u64(need("feature_dim"), "feature_dim");
    spec.feature_density =
        detail::parse_f64(need("feature_density"), "feature_density");
    spec.num_classes = detail::parse_u64(need("num_classes"), "num_classes");
    spec.seed = detail::parse_u64(need("seed"), "seed");
    for (const std::string& t : ioutil::split(need("hidden_dims"), ','))
      spec.hidden_dims.push_back(
          detail::parse_u64(ioutil::strip(t), "hidden_dims"));
    cfg.synthetic = std::move(spec);
  } else {
    FileSource src;
    auto need = [&](const char* key) -> std::string {
      auto v = get(key);
      if (!v) throw MissingKey(std::string("missing key '") + key + "'");
      return *v;
    };
    src.graph = need("graph");
    src.features = need("features");
    if (auto v = get("features_kind")) {
      if (*v == "dense") src.features_kind = MatrixKind::Dense;
      else if (*v == "sparse") src.features_kind = MatrixKind::Sparse;
      else throw ConfigTypeError("features_kind: expected dense|sparse");
    }
    for (const std::string& t : ioutil::split(need("weights"), ','))
      src.weights.push_back(ioutil::strip(t));
    if (auto v = get("weight_checksums"))
      for (const std::string& t : ioutil::split(*v, ','))
        src.weight_checksums.push_back(ioutil::strip(t));
    if (auto v = get("labels")) src.labels = *v;
    cfg.files = std::move(src);
  }
  return cfg;
}

inline DatasetBundle load_bundle(const RunConfig& cfg) {
  if (cfg.synthetic) return generate_synthetic(*cfg.synthetic);
  const FileSource& src = *cfg.files;
  DatasetBundle bundle;
  bundle.name = src.graph;
  bundle.graph = load_graph(src.graph);
  if (src.features_kind == MatrixKind::Sparse)
    bundle.sparse_features = load_sparse_matrix(src.features);
  else
    bundle.dense_features = load_dense_matrix(src.features);
  for (const std::string& p : src.weights)
    bundle.weights.push_back(load_dense_matrix(p));
  bundle.weight_checksum_overrides.assign(bundle.weights.size(), std::nullopt);
  for (std::size_t k = 0; k < src.weight_checksums.size(); ++k) {
    if (k >= bundle.weights.size())
      throw ShapeInconsistent("more weight checksums than layers");
    bundle.weight_checksum_overrides[k] =
        load_dense_matrix(src.weight_checksums[k]);
  }
  if (!src.labels.empty()) bundle.golden_labels = load_labels(src.labels);
  bundle.validate();
  return bundle;
}

// Materialized model + features in the caller-chosen representation.
struct PreparedRun {
  GcnModel model;
  std::optional<SparseMatrix> sparse_features;
  std::optional<DenseMatrix> dense_features;

  MatrixView features() const {
    return sparse_features ? MatrixView(*sparse_features)
                           : MatrixView(*dense_features);
  }
};

inline PreparedRun prepare_run(const DatasetBundle& bundle,
                               FeatureRep rep) {
  NormalizedAdjacency adj = normalize_adjacency(bundle.graph);
  std::vector<GcnLayer> layers;
  for (std::size_t k = 0; k < bundle.weights.size(); ++k) {
    const bool last = k + 1 == bundle.weights.size();
    if (bundle.weight_checksum_overrides[k])
      layers.push_back(make_layer_with_checksum(
          bundle.weights[k], *bundle.weight_checksum_overrides[k], !last));
    else
      layers.push_back(make_layer(bundle.weights[k], !last));
  }
  GcnModel model{std::move(adj), std::move(layers)};

  PreparedRun run{std::move(model), std::nullopt, std::nullopt};
  if (rep == FeatureRep::Sparse) {
    if (bundle.sparse_features)
      run.sparse_features = *bundle.sparse_features;
    else
      run.sparse_features = SparseMatrix::from_dense(*bundle.dense_features);
  } else {
    if (bundle.dense_features)
      run.dense_features = *bundle.dense_features;
    else
      run.dense_features = bundle.sparse_features->to_dense();
  }
  return run;
}

}  // namespace gcnabft
