#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "gcnabft/kernels.hpp"
#include "gcnabft/matrix.hpp"

namespace gcnabft {

// Undirected graph as a deduplicated edge list. Self-edges are tolerated in
// the input; the normalized adjacency adds self-loops once regardless.
struct Graph {
  std::size_t num_nodes = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // canonical u <= v

  static Graph from_edges(
      std::size_t num_nodes,
      std::vector<std::pair<std::size_t, std::size_t>> raw_edges) {
    Graph g;
    g.num_nodes = num_nodes;
    for (auto& [u, v] : raw_edges) {
      if (u >= num_nodes || v >= num_nodes)
        throw IndexOutOfRange("edge endpoint out of range");
      if (u > v) std::swap(u, v);
    }
    std::sort(raw_edges.begin(), raw_edges.end());
    raw_edges.erase(std::unique(raw_edges.begin(), raw_edges.end()),
                    raw_edges.end());
    g.edges = std::move(raw_edges);
    return g;
  }
};

// S = D^{-1/2} (A+I) D^{-1/2} with D the degree matrix of A+I. Every node
// carries a self-loop, so no column of S is zero; s_c is precomputed once
// and reused across layers and inferences.
struct NormalizedAdjacency {
  SparseMatrix matrix;
  DenseMatrix col_checksum_s_c;
};

inline NormalizedAdjacency normalize_adjacency(const Graph& g) {
  if (g.num_nodes == 0)
    throw DimensionMismatch("normalize_adjacency: graph must have >= 1 node");
  const std::size_t n = g.num_nodes;

  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) neighbors[i].push_back(i);  // A+I
  for (const auto& [u, v] : g.edges) {
    if (u == v) continue;  // already covered by the self-loop
    neighbors[u].push_back(v);
    neighbors[v].push_back(u);
  }

  std::vector<double> degree(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(neighbors[i].begin(), neighbors[i].end());
    neighbors[i].erase(std::unique(neighbors[i].begin(), neighbors[i].end()),
                       neighbors[i].end());
    degree[i] = static_cast<double>(neighbors[i].size());
  }

  std::vector<std::size_t> offsets(n + 1, 0);
  std::vector<std::size_t> cols;
  std::vector<double> vals;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : neighbors[i]) {
      cols.push_back(j);
      vals.push_back(1.0 / std::sqrt(degree[i] * degree[j]));
    }
    offsets[i + 1] = cols.size();
  }
  SparseMatrix s(n, n, std::move(offsets), std::move(cols), std::move(vals));

  OpCounter offline;  // offline checksum state, excluded from check-op totals
  DenseMatrix s_c = col_checksum(s, offline);
  return NormalizedAdjacency{std::move(s), std::move(s_c)};
}

}  // namespace gcnabft
