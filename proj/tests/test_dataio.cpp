#include <unistd.h>

#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gcnabft/dataio.hpp"

using namespace gcnabft;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("gcnabft-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name, const std::string& content) const {
    fs::path p = path / name;
    std::ofstream out(p);
    out << content;
    return p.string();
  }
};

}  // namespace

TEST_CASE("load_graph basics") {
  TempDir tmp;
  SECTION("two edges, three nodes") {
    Graph g = load_graph(tmp.file("g.txt", "0 1\n1 2\n"));
    CHECK(g.num_nodes == 3);
    CHECK(g.edges.size() == 2);
  }
  SECTION("duplicate undirected edge collapses") {
    Graph g = load_graph(tmp.file("g.txt", "0 1\n1 0\n"));
    CHECK(g.edges.size() == 1);
  }
  SECTION("parse error reports the line") {
    try {
      load_graph(tmp.file("g.txt", "0 x\n"));
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == 1);
    }
  }
  SECTION("header overrides the node count") {
    Graph g = load_graph(tmp.file("g.txt", "n 5\n0 1\n"));
    CHECK(g.num_nodes == 5);
  }
  SECTION("comments and CRLF tolerated") {
    Graph g = load_graph(tmp.file("g.txt", "# comment\r\n0 1\r\n\r\n"));
    CHECK(g.num_nodes == 2);
  }
  SECTION("out-of-range endpoint") {
    CHECK_THROWS_AS(load_graph(tmp.file("g.txt", "n 2\n0 5\n")),
                    IndexOutOfRange);
  }
}

TEST_CASE("dense matrix file") {
  TempDir tmp;
  DenseMatrix m = load_dense_matrix(tmp.file("m.csv", "1,2\n3,4\n"));
  CHECK(m == DenseMatrix(2, 2, {1, 2, 3, 4}));

  CHECK_THROWS_AS(load_dense_matrix(tmp.file("bad.csv", "1,2\n3\n")),
                  ShapeInconsistent);
  CHECK_THROWS_AS(load_dense_matrix(tmp.file("nan.csv", "1,x\n")), ParseError);
}

TEST_CASE("sparse matrix file") {
  TempDir tmp;
  SECTION("coordinate triplets") {
    SparseMatrix m = load_sparse_matrix(tmp.file("m.mtx", "2 2 1\n0 1 5.0\n"));
    CHECK(m.nnz() == 1);
    CHECK(m.to_dense()(0, 1) == 5.0);
  }
  SECTION("explicit zero rejected") {
    CHECK_THROWS_AS(load_sparse_matrix(tmp.file("z.mtx", "2 2 1\n0 1 0.0\n")),
                    ExplicitZero);
  }
  SECTION("nnz mismatch") {
    CHECK_THROWS_AS(load_sparse_matrix(tmp.file("m.mtx", "2 2 2\n0 1 5.0\n")),
                    ShapeInconsistent);
  }
}

TEST_CASE("round trips are value-identical") {
  TempDir tmp;
  Rng rng(17);
  SECTION("graph") {
    Graph g;
    g.num_nodes = 9;
    for (std::size_t u = 0; u < 9; ++u)
      for (std::size_t v = u + 1; v < 9; ++v)
        if (rng.uniform01() < 0.3) g.edges.emplace_back(u, v);
    g = Graph::from_edges(g.num_nodes, std::move(g.edges));
    const std::string p = (tmp.path / "g.txt").string();
    write_graph(g, p);
    Graph back = load_graph(p);
    CHECK(back.num_nodes == g.num_nodes);
    CHECK(back.edges == g.edges);
  }
  SECTION("dense") {
    DenseMatrix m(3, 4);
    for (double& v : m.data()) v = rng.uniform(-1, 1);
    const std::string p = (tmp.path / "m.csv").string();
    write_dense_matrix(m, p);
    CHECK(load_dense_matrix(p) == m);
  }
  SECTION("sparse") {
    std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 6; ++j)
        if (rng.uniform01() < 0.4) trip.emplace_back(i, j, rng.uniform(0.1, 2));
    SparseMatrix m = SparseMatrix::from_triplets(5, 6, std::move(trip));
    const std::string p = (tmp.path / "m.mtx").string();
    write_sparse_matrix(m, p);
    CHECK(load_sparse_matrix(p) == m);
  }
}

TEST_CASE("generate_synthetic") {
  SECTION("deterministic for a fixed spec") {
    SyntheticSpec spec{16, 0.2, 8, 0.5, {4}, 3, 7};
    DatasetBundle a = generate_synthetic(spec);
    DatasetBundle b = generate_synthetic(spec);
    CHECK(a.graph.edges == b.graph.edges);
    CHECK(*a.sparse_features == *b.sparse_features);
    REQUIRE(a.weights.size() == b.weights.size());
    for (std::size_t k = 0; k < a.weights.size(); ++k)
      CHECK(a.weights[k] == b.weights[k]);
  }
  SECTION("edge_probability 1 gives the complete graph") {
    SyntheticSpec spec{6, 1.0, 4, 1.0, {}, 2, 1};
    DatasetBundle b = generate_synthetic(spec);
    CHECK(b.graph.edges.size() == 15);
    NormalizedAdjacency adj = normalize_adjacency(b.graph);
    CHECK(adj.matrix.nnz() == 36);  // nnz(A+I) = n^2
  }
  SECTION("edge count consistent with Binomial(120, 0.2)") {
    // chi^2 over binned edge counts from 400 seeds; 5 bins, 4 dof,
    // critical value 13.277 at p = 0.01
    SyntheticSpec spec{16, 0.2, 4, 0.5, {}, 2, 0};
    const int samples = 400;
    // bins: [0,18] (19,21] (22,24] (25,27] (28,120]
    const double edges_hi[5] = {18, 21, 24, 27, 120};
    const double probs[5] = {0.10187, 0.18770, 0.26478, 0.23587, 0.20979};
    int counts[5] = {0, 0, 0, 0, 0};
    for (int s = 0; s < samples; ++s) {
      spec.seed = 1000 + s;
      DatasetBundle b = generate_synthetic(spec);
      const double e = static_cast<double>(b.graph.edges.size());
      for (int bin = 0; bin < 5; ++bin)
        if (e <= edges_hi[bin]) {
          counts[bin] += 1;
          break;
        }
      CHECK(b.graph.edges.size() >= 5);
      CHECK(b.graph.edges.size() <= 45);
    }
    double chi2 = 0.0;
    for (int bin = 0; bin < 5; ++bin) {
      const double expect = samples * probs[bin];
      chi2 += (counts[bin] - expect) * (counts[bin] - expect) / expect;
    }
    CHECK(chi2 < 13.277);
  }
  SECTION("n=16 p=0.2 seed=7 edge count lands in [10,40]") {
    SyntheticSpec spec{16, 0.2, 4, 0.5, {}, 2, 7};
    DatasetBundle b = generate_synthetic(spec);
    CHECK(b.graph.edges.size() >= 10);
    CHECK(b.graph.edges.size() <= 40);
  }
  SECTION("weights stay within the Glorot range") {
    SyntheticSpec spec{8, 0.3, 10, 0.5, {6}, 4, 3};
    DatasetBundle b = generate_synthetic(spec);
    const double s1 = std::sqrt(6.0 / (10 + 6));
    for (double v : b.weights[0].data()) CHECK(std::abs(v) <= s1);
  }
  SECTION("invalid spec") {
    SyntheticSpec spec{0, 0.2, 4, 0.5, {}, 2, 1};
    CHECK_THROWS_AS(generate_synthetic(spec), DimensionMismatch);
    SyntheticSpec bad_p{4, 0.0, 4, 0.5, {}, 2, 1};
    CHECK_THROWS_AS(generate_synthetic(bad_p), DimensionMismatch);
  }
}

TEST_CASE("load_matrix dispatches on kind") {
  TempDir tmp;
  auto dense = load_matrix(tmp.file("d.csv", "1,2\n"), MatrixKind::Dense);
  CHECK(std::holds_alternative<DenseMatrix>(dense));
  auto sparse =
      load_matrix(tmp.file("s.mtx", "1 2 1\n0 1 3.5\n"), MatrixKind::Sparse);
  CHECK(std::holds_alternative<SparseMatrix>(sparse));
}

TEST_CASE("generated bundle written and reloaded is value-identical") {
  TempDir tmp;
  SyntheticSpec spec{12, 0.25, 6, 0.5, {4}, 3, 21};
  DatasetBundle bundle = generate_synthetic(spec);

  write_graph(bundle.graph, (tmp.path / "g.txt").string());
  write_sparse_matrix(*bundle.sparse_features, (tmp.path / "f.mtx").string());
  write_dense_matrix(bundle.weights[0], (tmp.path / "w0.csv").string());
  write_dense_matrix(bundle.weights[1], (tmp.path / "w1.csv").string());
  const std::string cfg =
      tmp.file("r.cfg", "graph = " + (tmp.path / "g.txt").string() +
                            "\nfeatures = " + (tmp.path / "f.mtx").string() +
                            "\nweights = " + (tmp.path / "w0.csv").string() +
                            "," + (tmp.path / "w1.csv").string() + "\n");

  DatasetBundle back = load_bundle(load_config(cfg));
  CHECK(back.graph.num_nodes == bundle.graph.num_nodes);
  CHECK(back.graph.edges == bundle.graph.edges);
  CHECK(*back.sparse_features == *bundle.sparse_features);
  REQUIRE(back.weights.size() == bundle.weights.size());
  for (std::size_t k = 0; k < back.weights.size(); ++k)
    CHECK(back.weights[k] == bundle.weights[k]);
}

TEST_CASE("config parsing") {
  TempDir tmp;
  SECTION("full synthetic campaign config") {
    const std::string p = tmp.file("c.cfg",
                                   "trials = 5000\n"
                                   "master_seed = 9\n"
                                   "thresholds = 1e-4,1e-5,1e-6,1e-7\n"
                                   "checkers = both\n"
                                   "faults_per_trial = 1\n"
                                   "synthetic = true\n"
                                   "num_nodes = 64\n"
                                   "edge_probability = 0.1\n"
                                   "feature_dim = 32\n"
                                   "feature_density = 0.5\n"
                                   "hidden_dims = 16\n"
                                   "num_classes = 4\n"
                                   "seed = 1\n");
    RunConfig cfg = load_config(p);
    CHECK(cfg.campaign.trials == 5000);
    CHECK(cfg.campaign.master_seed == 9);
    REQUIRE(cfg.campaign.thresholds.size() == 4);
    CHECK(cfg.campaign.thresholds[3] == 1e-7);
    CHECK(cfg.campaign.checkers.size() == 2);
    REQUIRE(cfg.synthetic.has_value());
    CHECK(cfg.synthetic->num_nodes == 64);
    CHECK(cfg.synthetic->hidden_dims == std::vector<std::size_t>{16});
  }
  SECTION("unknown key is an error (typo detection)") {
    CHECK_THROWS_AS(load_config(tmp.file("c.cfg", "trails = 10\n")),
                    UnknownKey);
  }
  SECTION("missing synthetic key") {
    CHECK_THROWS_AS(load_config(tmp.file("c.cfg", "synthetic = true\n")),
                    MissingKey);
  }
  SECTION("type errors") {
    CHECK_THROWS_AS(load_config(tmp.file("c.cfg", "trials = soon\n")),
                    ConfigTypeError);
  }
  SECTION("bundle load from files") {
    const std::string gp = tmp.file("g.txt", "0 1\n1 2\n");
    const std::string fp = tmp.file("f.mtx", "3 2 2\n0 0 1.0\n2 1 -2.0\n");
    const std::string w1 = tmp.file("w1.csv", "0.5,0.25\n-0.5,0.125\n");
    const std::string w2 = tmp.file("w2.csv", "1,0\n0,1\n");
    const std::string cp = tmp.file("c.cfg", "graph = " + gp +
                                                 "\nfeatures = " + fp +
                                                 "\nweights = " + w1 + "," +
                                                 w2 + "\n");
    RunConfig cfg = load_config(cp);
    REQUIRE(cfg.files.has_value());
    DatasetBundle bundle = load_bundle(cfg);
    CHECK(bundle.graph.num_nodes == 3);
    CHECK(bundle.weights.size() == 2);
    PreparedRun run = prepare_run(bundle, FeatureRep::Dense);
    CHECK_FALSE(run.features().is_sparse());
    CHECK(run.model.layers.size() == 2);
    CHECK(run.model.layers[1].apply_activation == false);
  }
}
