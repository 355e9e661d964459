#include "fairres/walks.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "fairres/errors.hpp"

namespace fairres {

namespace {

void check_walk_args(const Graph& g, std::size_t a, std::size_t b, std::size_t t) {
  if (t > kMaxWalkLength) {
    throw ContractError("walk length " + std::to_string(t) + " exceeds the enumeration guard of " +
                        std::to_string(kMaxWalkLength));
  }
  if (a >= g.num_nodes() || b >= g.num_nodes()) throw ContractError("walk endpoint out of range");
}

// Depth-first enumeration of every length-t walk starting at `source`. The
// visitor receives the node sequence and the product of 1/d over left nodes.
template <typename Visitor>
void enumerate_walks(const Graph& g, std::size_t source, std::size_t t, Visitor&& visit) {
  std::vector<std::size_t> path;
  path.reserve(t + 1);
  path.push_back(source);
  auto rec = [&](auto&& self, double weight) -> void {
    if (path.size() == t + 1) {
      visit(path, weight);
      return;
    }
    const std::size_t v = path.back();
    const double step = 1.0 / static_cast<double>(g.degree(v));
    for (std::size_t u : g.neighbors(v)) {
      path.push_back(u);
      self(self, weight * step);
      path.pop_back();
    }
  };
  rec(rec, 1.0);
}

}  // namespace

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(c);
}

double walk_probability(const Graph& g, std::size_t target, std::size_t source, std::size_t t) {
  check_walk_args(g, target, source, t);
  double mass = 0.0;
  enumerate_walks(g, source, t, [&](const std::vector<std::size_t>& path, double w) {
    if (path.back() == target) mass += w;
  });
  return mass;
}

double signed_walk_weight(const Graph& g, std::size_t i, std::size_t r, std::size_t k) {
  check_walk_args(g, i, r, k);
  double w = i == r ? 1.0 : 0.0;
  for (std::size_t t = 1; t <= k; ++t) {
    const double sign = t % 2 == 0 ? 1.0 : -1.0;
    w += binomial(k, t) * sign * walk_probability(g, i, r, t);
  }
  return w;
}

double alpha_walk_weight(const Graph& g, std::size_t i, std::size_t r, std::size_t k,
                         double alpha) {
  check_walk_args(g, i, r, k);
  double w = 0.0;
  for (std::size_t t = 0; t <= k; ++t) {
    w += binomial(k, t) * std::pow(alpha, static_cast<double>(k - t)) *
         std::pow(1.0 - alpha, static_cast<double>(t)) * walk_probability(g, i, r, t);
  }
  return w;
}

WalkCensus tottering_census(const Graph& g, std::size_t target, std::size_t source,
                            std::size_t t) {
  check_walk_args(g, target, source, t);
  WalkCensus c;
  c.source = source;
  c.target = target;
  c.length = t;
  enumerate_walks(g, source, t, [&](const std::vector<std::size_t>& path, double w) {
    if (path.back() != target) return;
    ++c.num_walks;
    c.probability_mass += w;
    for (std::size_t s = 2; s < path.size(); ++s) {
      if (path[s] == path[s - 2]) {
        ++c.num_tottering_walks;
        break;
      }
    }
  });
  return c;
}

double binomial_expansion_check(const Graph& g, std::size_t k) {
  if (k > kMaxWalkLength) {
    throw ContractError("power " + std::to_string(k) + " exceeds the guard of " +
                        std::to_string(kMaxWalkLength));
  }
  if (g.has_isolated_nodes()) {
    throw ContractError("binomial expansion needs a graph without isolated nodes");
  }
  const std::size_t n = g.num_nodes();
  const DenseMatrix lhs = matrix_power(sym_laplacian(g).to_dense(), static_cast<unsigned>(k));
  const DenseMatrix p = transition_matrix(g).to_dense();
  const auto deg = g.degrees();

  DenseMatrix inner(n, n);
  DenseMatrix pt = DenseMatrix::identity(n);
  for (std::size_t t = 0; t <= k; ++t) {
    const double coeff = binomial(k, t) * (t % 2 == 0 ? 1.0 : -1.0);
    inner = inner + coeff * pt;
    pt = matmul(p, pt);
  }
  DenseMatrix rhs(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      rhs(i, j) = inner(i, j) * std::sqrt(deg[j]) / std::sqrt(deg[i]);
  return max_abs_diff(lhs, rhs);
}

std::vector<Graph> connected_graphs(std::size_t n) {
  if (n == 0 || n > 7) throw ContractError("connected_graphs supports 1..7 nodes");
  std::vector<Edge> slots;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = u + 1; v < n; ++v) slots.emplace_back(u, v);
  const std::vector<int> labels(n, 0);
  std::vector<Graph> out;
  const std::uint64_t count = std::uint64_t{1} << slots.size();
  std::vector<Edge> edges;
  std::vector<std::size_t> parent(n);
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    edges.clear();
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    std::size_t components = n;
    for (std::size_t b = 0; b < slots.size(); ++b) {
      if ((mask >> b & 1U) == 0) continue;
      edges.push_back(slots[b]);
      const auto ra = find(slots[b].first);
      const auto rb = find(slots[b].second);
      if (ra != rb) {
        parent[ra] = rb;
        --components;
      }
    }
    if (components == 1) out.push_back(build_graph(n, edges, labels));
  }
  return out;
}

bool WalkVerifyReport::passed() const {
  for (const auto& c : checks)
    if (!c.passed()) return false;
  return true;
}

WalkVerifyReport verify_walks(const WalkVerifyOptions& opts) {
  if (opts.max_k > kMaxWalkLength) {
    throw ContractError("--max-k " + std::to_string(opts.max_k) +
                        " exceeds the enumeration guard of " + std::to_string(kMaxWalkLength));
  }
  if (opts.max_nodes == 0 || opts.max_nodes > 7) {
    throw ContractError("--max-nodes must lie in 1..7");
  }

  WalkCheck prob{"walk_probability == [P^t]_ij", 0, 0.0, 1e-12};
  WalkCheck signed_w{"signed_walk_weight == [(I-P)^k]_ir", 0, 0.0, 1e-10};
  WalkCheck alpha_w{"alpha_walk_weight == [(aI+(1-a)P)^k]_ir", 0, 0.0, 1e-10};
  WalkCheck vacuous{"alpha=0.5 weight == 2^-k sum_t C(k,t) p_t", 0, 0.0, 1e-10};
  WalkCheck conservation{"sum_i p_t(i|j) == 1", 0, 0.0, 1e-12};
  WalkCheck expansion{"binomial expansion of lap^k", 0, 0.0, 1e-9};
  WalkCheck census{"tottering census invariants (violations)", 0, 0.0, 0.0};

  WalkVerifyReport report;
  for (std::size_t n = 1; n <= opts.max_nodes; ++n) {
    for (const Graph& g : connected_graphs(n)) {
      ++report.graphs;
      DenseMatrix p = transition_matrix(g).to_dense();
      if (opts.corrupt_transition && n >= 2) p(0, 1) += 1e-3;
      const DenseMatrix eye = DenseMatrix::identity(n);

      std::vector<DenseMatrix> powers{eye};
      for (std::size_t t = 1; t <= opts.max_k; ++t) powers.push_back(matmul(p, powers.back()));

      // Distribution p_t(. | j) from the walk enumerator, reused below.
      std::vector<std::vector<std::vector<double>>> dist(
          opts.max_k + 1, std::vector<std::vector<double>>(n, std::vector<double>(n)));
      for (std::size_t t = 0; t <= opts.max_k; ++t) {
        for (std::size_t j = 0; j < n; ++j) {
          double total = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            const double w = walk_probability(g, i, j, t);
            dist[t][j][i] = w;
            total += w;
            prob.max_error = std::max(prob.max_error, std::abs(w - powers[t](i, j)));
            ++prob.cases;
          }
          if (n >= 2) {
            conservation.max_error = std::max(conservation.max_error, std::abs(total - 1.0));
            ++conservation.cases;
          }
        }
      }

      for (std::size_t k = 0; k <= opts.max_k; ++k) {
        const DenseMatrix ip = matrix_power(eye - p, static_cast<unsigned>(k));
        const DenseMatrix half = matrix_power(0.5 * eye + 0.5 * p, static_cast<unsigned>(k));
        const DenseMatrix over = matrix_power(1.5 * eye + (-0.5) * p, static_cast<unsigned>(k));
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t r = 0; r < n; ++r) {
            signed_w.max_error =
                std::max(signed_w.max_error, std::abs(signed_walk_weight(g, i, r, k) - ip(i, r)));
            ++signed_w.cases;
            const double a_half = alpha_walk_weight(g, i, r, k, 0.5);
            alpha_w.max_error = std::max(alpha_w.max_error, std::abs(a_half - half(i, r)));
            alpha_w.max_error = std::max(
                alpha_w.max_error, std::abs(alpha_walk_weight(g, i, r, k, 1.5) - over(i, r)));
            alpha_w.cases += 2;
            double vac = 0.0;
            for (std::size_t t = 0; t <= k; ++t) vac += binomial(k, t) * dist[t][r][i];
            vac *= std::ldexp(1.0, -static_cast<int>(k));
            vacuous.max_error = std::max(vacuous.max_error, std::abs(a_half - vac));
            ++vacuous.cases;

            const WalkCensus c = tottering_census(g, i, r, k);
            const bool bad = c.num_tottering_walks > c.num_walks ||
                             (k <= 1 && c.num_tottering_walks != 0) ||
                             std::abs(c.probability_mass - dist[k][r][i]) > 1e-12 ||
                             c.probability_mass < 0.0 || c.probability_mass > 1.0 + 1e-12;
            if (bad) census.max_error += 1.0;
            ++census.cases;
          }
        }
        if (n >= 2) {
          expansion.max_error = std::max(expansion.max_error, binomial_expansion_check(g, k));
          ++expansion.cases;
        }
      }
    }
  }
  report.checks = {prob, conservation, signed_w, alpha_w, vacuous, expansion, census};
  return report;
}

}  // namespace fairres
