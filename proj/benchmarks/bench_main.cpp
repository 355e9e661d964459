#include <benchmark/benchmark.h>

#include "fairres/fairing.hpp"
#include "fairres/graph.hpp"
#include "fairres/readout.hpp"
#include "fairres/rng.hpp"
#include "fairres/spectral.hpp"
#include "fairres/walks.hpp"

using namespace fairres;

namespace {

// Ring plus random chords, a rough stand-in for molecular graphs.
Graph chorded_ring(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> edges;
  for (std::size_t v = 0; v < n; ++v) edges.emplace_back(v, (v + 1) % n);
  for (std::size_t c = 0; c < n / 4; ++c) {
    const std::size_t u = rng.below(n), v = rng.below(n);
    if (u != v) edges.emplace_back(u, v);
  }
  std::vector<int> labels(n);
  for (auto& l : labels) l = static_cast<int>(rng.below(8));
  return build_graph(n, edges, labels);
}

DenseMatrix signal(std::size_t rows, std::size_t cols) {
  Rng rng(7);
  DenseMatrix x(rows, cols);
  for (double& v : x.data()) v = rng.uniform(-1.0, 1.0);
  return x;
}

void BM_Spmm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const SparseMatrix lap = sym_laplacian(chorded_ring(n, 1));
  const DenseMatrix x = signal(n, 16);
  for (auto _ : state) benchmark::DoNotOptimize(spmm(lap, x));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(lap.nnz() * 16));
}
BENCHMARK(BM_Spmm)->RangeMultiplier(4)->Range(32, 8192);

void BM_FairingReservoir(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const SparseMatrix lap = sym_laplacian(chorded_ring(n, 2));
  const DenseMatrix x = signal(n, 8);
  const auto schedule = build_alternating_schedule(6, kDefaultShrink, kDefaultUnshrink);
  for (auto _ : state) benchmark::DoNotOptimize(fairing_reservoir(x, lap, schedule));
}
BENCHMARK(BM_FairingReservoir)->RangeMultiplier(4)->Range(32, 2048);

void BM_EigSym(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix lap = sym_laplacian(chorded_ring(n, 3)).to_dense();
  for (auto _ : state) benchmark::DoNotOptimize(eig_sym(lap));
}
BENCHMARK(BM_EigSym)->RangeMultiplier(2)->Range(8, 128)->Unit(benchmark::kMillisecond);

void BM_WalkProbability(benchmark::State& state) {
  const Graph g = chorded_ring(12, 4);
  const auto t = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(walk_probability(g, 0, 5, t));
}
BENCHMARK(BM_WalkProbability)->DenseRange(2, 8, 2);

void BM_ReadoutStep(benchmark::State& state) {
  Rng rng(5);
  ReadoutModel m = init_readout(90, 50, 2, 0.5, rng);
  const DenseMatrix x = signal(32, 90);
  std::vector<int> y(32);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(i % 2);
  AdamOptimizer opt(m, 1e-3);
  for (auto _ : state) opt.step(m, loss_and_grad(m, x, y, 5e-4, rng).grad);
}
BENCHMARK(BM_ReadoutStep);

}  // namespace

BENCHMARK_MAIN();
