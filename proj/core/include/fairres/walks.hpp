#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fairres/graph.hpp"

namespace fairres {

// Walk lengths are capped because enumeration is exponential in the length.
inline constexpr std::size_t kMaxWalkLength = 8;

// Summary of every length-t walk from source to target.
struct WalkCensus {
  std::size_t source = 0;
  std::size_t target = 0;
  std::size_t length = 0;
  std::size_t num_walks = 0;
  double probability_mass = 0.0;
  // Walks with at least one immediate reflection v -> u -> v.
  std::size_t num_tottering_walks = 0;
};

// Probability p_t(target | source) of reaching target from source in exactly
// t uniform random steps, by enumerating every walk. Each step contributes
// 1/d of the node being left, so the result equals [P^t]_{target,source}.
double walk_probability(const Graph& g, std::size_t target, std::size_t source,
                        std::size_t t);

// delta_ir + sum_{t=1..k} C(k,t) (-1)^t p_t(i|r) == [(I - P)^k]_ir.
double signed_walk_weight(const Graph& g, std::size_t i, std::size_t r, std::size_t k);

// sum_{t=0..k} C(k,t) alpha^(k-t) (1-alpha)^t p_t(i|r) == [(alpha I + (1-alpha) P)^k]_ir.
double alpha_walk_weight(const Graph& g, std::size_t i, std::size_t r, std::size_t k,
                         double alpha);

WalkCensus tottering_census(const Graph& g, std::size_t target, std::size_t source,
                            std::size_t t);

// Max elementwise |lap^k - sum_t C(k,t) (-1)^t D^{-1/2} P^t D^{1/2}|, both
// sides built densely. Throws ContractError for isolated nodes or k > guard.
double binomial_expansion_check(const Graph& g, std::size_t k);

double binomial(std::size_t n, std::size_t k);

// Every connected simple graph on exactly n labelled nodes (n <= 7).
std::vector<Graph> connected_graphs(std::size_t n);

struct WalkVerifyOptions {
  std::size_t max_nodes = 6;
  std::size_t max_k = 4;
  // Test hook: perturbs one entry of the dense transition-matrix oracle.
  bool corrupt_transition = false;
};

struct WalkCheck {
  std::string name;
  std::size_t cases = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed() const { return max_error <= tolerance; }
};

struct WalkVerifyReport {
  std::vector<WalkCheck> checks;
  std::size_t graphs = 0;
  bool passed() const;
};

// Runs the walk oracles against dense matrix algebra over every connected
// graph with at most max_nodes nodes.
WalkVerifyReport verify_walks(const WalkVerifyOptions& opts);

}  // namespace fairres
