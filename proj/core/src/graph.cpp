#include "fairres/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fairres/errors.hpp"

namespace fairres {

std::vector<double> Graph::degrees() const {
  std::vector<double> d(num_nodes());
  for (std::size_t v = 0; v < d.size(); ++v) d[v] = static_cast<double>(degree(v));
  return d;
}

bool Graph::has_isolated_nodes() const {
  for (std::size_t v = 0; v < num_nodes(); ++v)
    if (degree(v) == 0) return true;
  return false;
}

Graph build_graph(std::size_t num_nodes, std::span<const Edge> edges,
                  std::span<const int> node_labels) {
  if (node_labels.size() != num_nodes) {
    throw StructuralError("graph has " + std::to_string(num_nodes) + " nodes but " +
                          std::to_string(node_labels.size()) + " labels");
  }
  Graph g;
  g.labels_.assign(node_labels.begin(), node_labels.end());
  g.edges_.reserve(edges.size());
  for (auto [u, v] : edges) {
    if (u >= num_nodes || v >= num_nodes) {
      throw StructuralError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                            ") out of range for " + std::to_string(num_nodes) + " nodes");
    }
    if (u == v) {
      ++g.self_loops_stripped_;
      continue;
    }
    g.edges_.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()), g.edges_.end());

  std::vector<Triplet> trips;
  trips.reserve(2 * g.edges_.size());
  for (auto [u, v] : g.edges_) {
    trips.push_back({u, v, 1.0});
    trips.push_back({v, u, 1.0});
  }
  g.adjacency_ = SparseMatrix::from_triplets(num_nodes, num_nodes, std::move(trips));
  return g;
}

namespace {

std::vector<double> inv_sqrt_degrees(const Graph& g) {
  std::vector<double> s(g.num_nodes(), 0.0);
  for (std::size_t v = 0; v < s.size(); ++v) {
    const auto d = g.degree(v);
    if (d > 0) s[v] = 1.0 / std::sqrt(static_cast<double>(d));
  }
  return s;
}

}  // namespace

SparseMatrix normalized_adjacency(const Graph& g) {
  const auto s = inv_sqrt_degrees(g);
  std::vector<Triplet> trips;
  trips.reserve(2 * g.num_edges());
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    for (std::size_t j : g.neighbors(i)) trips.push_back({i, j, s[i] * s[j]});
  return SparseMatrix::from_triplets(g.num_nodes(), g.num_nodes(), std::move(trips));
}

SparseMatrix sym_laplacian(const Graph& g) {
  const auto s = inv_sqrt_degrees(g);
  std::vector<Triplet> trips;
  trips.reserve(2 * g.num_edges() + g.num_nodes());
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    trips.push_back({i, i, 1.0});
    for (std::size_t j : g.neighbors(i)) trips.push_back({i, j, -(s[i] * s[j])});
  }
  return SparseMatrix::from_triplets(g.num_nodes(), g.num_nodes(), std::move(trips));
}

SparseMatrix transition_matrix(const Graph& g) {
  std::vector<Triplet> trips;
  trips.reserve(2 * g.num_edges());
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    for (std::size_t j : g.neighbors(i))
      trips.push_back({i, j, 1.0 / static_cast<double>(g.degree(j))});
  return SparseMatrix::from_triplets(g.num_nodes(), g.num_nodes(), std::move(trips));
}

SparseMatrix alpha_propagator(const Graph& g, double alpha) {
  if (!std::isfinite(alpha)) throw ContractError("alpha must be finite");
  const SparseMatrix lap = sym_laplacian(g);
  const double scale = 1.0 - alpha;
  std::vector<Triplet> trips;
  trips.reserve(lap.nnz());
  for (std::size_t i = 0; i < lap.num_rows(); ++i) {
    auto cols = lap.row_cols(i);
    auto vals = lap.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      const double identity = cols[p] == i ? 1.0 : 0.0;
      trips.push_back({i, cols[p], identity - scale * vals[p]});
    }
  }
  return SparseMatrix::from_triplets(g.num_nodes(), g.num_nodes(), std::move(trips));
}

}  // namespace fairres
