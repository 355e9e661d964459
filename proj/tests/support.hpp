#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "fairres/dense.hpp"
#include "fairres/graph.hpp"
#include "fairres/rng.hpp"

namespace fairres::testing {

// Erdos-Renyi graph with n nodes and edge probability p. When `connected`,
// a random spanning tree is added first.
inline Graph random_graph(Rng& rng, std::size_t n, double p, bool connected) {
  std::vector<Edge> edges;
  if (connected) {
    for (std::size_t v = 1; v < n; ++v) edges.emplace_back(rng.below(v), v);
  }
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v)
      if (rng.bernoulli(p)) edges.emplace_back(u, v);
  std::vector<int> labels(n);
  for (auto& l : labels) l = static_cast<int>(rng.below(3));
  return build_graph(n, edges, labels);
}

inline DenseMatrix random_signal(Rng& rng, std::size_t rows, std::size_t cols) {
  DenseMatrix x(rows, cols);
  for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);
  return x;
}

inline Graph path_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t v = 1; v < n; ++v) edges.emplace_back(v - 1, v);
  return build_graph(n, edges, std::vector<int>(n, 0));
}

inline Graph k2() { return path_graph(2); }

// Dense adjacency and degrees straight from the edge list.
inline DenseMatrix dense_adjacency(const Graph& g) {
  DenseMatrix a(g.num_nodes(), g.num_nodes());
  for (auto [u, v] : g.edges()) a(u, v) = a(v, u) = 1.0;
  return a;
}

inline std::vector<double> dense_degrees(const DenseMatrix& a) {
  std::vector<double> d(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) d[i] += a(i, j);
  return d;
}

// D^{s} A D^{t} with 0 for isolated nodes, built entrywise.
inline DenseMatrix scaled_adjacency(const Graph& g, double s, double t) {
  DenseMatrix a = dense_adjacency(g);
  const auto d = dense_degrees(a);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (a(i, j) != 0.0) a(i, j) *= std::pow(d[i], s) * std::pow(d[j], t);
  return a;
}

// D^{1/2} 1 scaled to unit norm, replicated over `cols` columns.
inline DenseMatrix kernel_signal(const Graph& g, std::size_t cols) {
  DenseMatrix x(g.num_nodes(), cols);
  double norm = 0.0;
  for (std::size_t v = 0; v < g.num_nodes(); ++v) norm += static_cast<double>(g.degree(v));
  norm = std::sqrt(norm);
  for (std::size_t v = 0; v < g.num_nodes(); ++v)
    for (std::size_t c = 0; c < cols; ++c)
      x(v, c) = (static_cast<double>(c) + 1.0) * std::sqrt(static_cast<double>(g.degree(v))) / norm;
  return x;
}

// Determinant by Gaussian elimination with partial pivoting.
inline double determinant(DenseMatrix m) {
  const std::size_t n = m.rows();
  double det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
    if (m(piv, c) == 0.0) return 0.0;
    if (piv != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(m(c, k), m(piv, k));
      det = -det;
    }
    det *= m(c, c);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = m(r, c) / m(c, c);
      for (std::size_t k = c; k < n; ++k) m(r, k) -= f * m(c, k);
    }
  }
  return det;
}

// Solves a x = b (b with several columns) by Gauss-Jordan elimination.
inline DenseMatrix gauss_solve(DenseMatrix a, DenseMatrix b) {
  const std::size_t n = a.rows();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    for (std::size_t k = 0; k < n; ++k) std::swap(a(c, k), a(piv, k));
    for (std::size_t k = 0; k < b.cols(); ++k) std::swap(b(c, k), b(piv, k));
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a(r, c) / a(c, c);
      for (std::size_t k = 0; k < n; ++k) a(r, k) -= f * a(c, k);
      for (std::size_t k = 0; k < b.cols(); ++k) b(r, k) -= f * b(c, k);
    }
  }
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < b.cols(); ++k) b(r, k) /= a(r, r);
  return b;
}

}  // namespace fairres::testing
