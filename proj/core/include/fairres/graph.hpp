#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "fairres/dense.hpp"
#include "fairres/sparse.hpp"

namespace fairres {

using Edge = std::pair<std::size_t, std::size_t>;

// Immutable simple undirected graph with categorical node labels.
//
// The adjacency is symmetric 0/1 with an empty diagonal. Edges are stored
// once each as (u, v) with u < v, sorted.
class Graph {
 public:
  Graph() = default;

  std::size_t num_nodes() const { return labels_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const int> node_labels() const { return labels_; }
  const SparseMatrix& adjacency() const { return adjacency_; }

  std::span<const std::size_t> neighbors(std::size_t v) const {
    return adjacency_.row_cols(v);
  }
  std::size_t degree(std::size_t v) const { return neighbors(v).size(); }
  std::vector<double> degrees() const;
  bool has_isolated_nodes() const;

  // Self-loops dropped while building.
  std::size_t self_loops_stripped() const { return self_loops_stripped_; }

  // Same nodes, labels and edges; the self-loop counter is not compared.
  friend bool operator==(const Graph& a, const Graph& b) {
    return a.labels_ == b.labels_ && a.edges_ == b.edges_;
  }

 private:
  friend Graph build_graph(std::size_t, std::span<const Edge>, std::span<const int>);

  std::vector<Edge> edges_;
  std::vector<int> labels_;
  SparseMatrix adjacency_;
  std::size_t self_loops_stripped_ = 0;
};

// Throws StructuralError on out-of-range endpoints or a label count that does
// not match num_nodes. Duplicate edges collapse and self-loops are stripped.
Graph build_graph(std::size_t num_nodes, std::span<const Edge> edges,
                  std::span<const int> node_labels);

// D^{-1/2} A D^{-1/2}, with D^{-1/2}_ii = 0 for isolated nodes.
SparseMatrix normalized_adjacency(const Graph& g);

// I - D^{-1/2} A D^{-1/2}. Isolated nodes get an identity row.
SparseMatrix sym_laplacian(const Graph& g);

// P = A D^{-1}: [P]_ij = a_ij / d_j, the probability of stepping j -> i.
SparseMatrix transition_matrix(const Graph& g);

// L = I - (1 - alpha) * sym_laplacian(g).
SparseMatrix alpha_propagator(const Graph& g, double alpha);

}  // namespace fairres
