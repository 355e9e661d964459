#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fairres/errors.hpp"
#include "fairres/fairing.hpp"
#include "fairres/graph.hpp"
#include "fairres/spectral.hpp"
#include "support.hpp"

using namespace fairres;
using fairres::testing::k2;
using fairres::testing::path_graph;
using fairres::testing::random_graph;
using fairres::testing::random_signal;

namespace {

void check_decomposition(const DenseMatrix& a, const SpectralDecomposition& dec) {
  const std::size_t n = a.rows();
  const DenseMatrix& u = dec.eigenvectors;
  CHECK(max_abs_diff(matmul(u.transpose(), u), DenseMatrix::identity(n)) <= 1e-9);
  DenseMatrix diag(n, n);
  for (std::size_t i = 0; i < n; ++i) diag(i, i) = dec.eigenvalues[i];
  CHECK(max_abs_diff(matmul(u, matmul(diag, u.transpose())), a) <= 1e-8);
  CHECK(std::is_sorted(dec.eigenvalues.begin(), dec.eigenvalues.end()));
}

}  // namespace

TEST_CASE("eig_sym examples") {
  const auto k2dec = eig_sym(sym_laplacian(k2()).to_dense());
  CHECK(k2dec.eigenvalues[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(k2dec.eigenvalues[1] == doctest::Approx(2.0).epsilon(1e-12));

  // Characteristic polynomial of the P3 Laplacian vanishes at 0, 1 and 2.
  const DenseMatrix p3 = sym_laplacian(path_graph(3)).to_dense();
  for (double root : {0.0, 1.0, 2.0}) {
    CHECK(std::abs(fairres::testing::determinant(p3 - root * DenseMatrix::identity(3))) < 1e-12);
  }
  const auto p3dec = eig_sym(p3);
  CHECK(std::abs(p3dec.eigenvalues[0] - 0.0) < 1e-12);
  CHECK(std::abs(p3dec.eigenvalues[1] - 1.0) < 1e-12);
  CHECK(std::abs(p3dec.eigenvalues[2] - 2.0) < 1e-12);
  check_decomposition(p3, p3dec);

  const auto idd = eig_sym(DenseMatrix::identity(4));
  for (double w : idd.eigenvalues) CHECK(w == 1.0);
  check_decomposition(DenseMatrix::identity(4), idd);
}

TEST_CASE("eig_sym contract errors") {
  CHECK_THROWS_AS(eig_sym(DenseMatrix(2, 3)), ContractError);
  CHECK_THROWS_AS(eig_sym(DenseMatrix(2, 2, {1, 0.5, 0.4, 1})), ContractError);
  CHECK_THROWS_AS(eig_sym(DenseMatrix(kMaxDenseNodes + 1, kMaxDenseNodes + 1)), ContractError);
}

TEST_CASE("eig_sym agrees with Eigen's self-adjoint solver") {
  Rng rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.below(30);
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) a(i, j) = a(j, i) = rng.uniform(-3.0, 3.0);
    const auto dec = eig_sym(a);
    check_decomposition(a, dec);

    Eigen::MatrixXd e(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(e);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::abs(dec.eigenvalues[i] - solver.eigenvalues()(static_cast<Eigen::Index>(i))) <= 1e-10);
  }
}

TEST_CASE("Laplacian spectrum lies in [0, 2]") {
  Rng rng(66);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng.below(20);
    Graph g = random_graph(rng, n, rng.uniform(0.0, 0.9), trial % 2 == 0);
    const SparseMatrix lap = sym_laplacian(g);
    const auto raw = eig_sym(lap.to_dense());
    for (double w : raw.eigenvalues) CHECK((w >= -1e-9 && w <= 2.0 + 1e-9));
    check_decomposition(lap.to_dense(), raw);
    const auto clamped = laplacian_decomposition(lap);
    for (double w : clamped.eigenvalues) CHECK((w >= 0.0 && w <= 2.0));
  }
}

TEST_CASE("dirichlet_energy examples") {
  const SparseMatrix lap = sym_laplacian(k2());
  CHECK(dirichlet_energy(DenseMatrix(2, 3), lap) == 0.0);
  CHECK(dirichlet_energy(DenseMatrix(2, 1, {1, -1}), lap) == 4.0);
  Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    Graph g = random_graph(rng, 2 + rng.below(15), 0.3, true);
    CHECK(std::abs(dirichlet_energy(fairres::testing::kernel_signal(g, 2), sym_laplacian(g))) <=
          1e-10);
  }
  CHECK_THROWS_AS(dirichlet_energy(DenseMatrix(3, 1), lap), StructuralError);
}

TEST_CASE("energy_spectrum examples and Parseval consistency") {
  const SparseMatrix lap = sym_laplacian(k2());
  const auto dec = laplacian_decomposition(lap);
  const auto e = energy_spectrum(DenseMatrix(2, 1, {1, -1}), dec);
  CHECK(std::abs(e[0]) <= 1e-12);
  CHECK(std::abs(e[1] - 4.0) <= 1e-12);

  Rng rng(2);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + rng.below(20);
    Graph g = random_graph(rng, n, 0.3, trial % 2 == 0);
    const SparseMatrix l = sym_laplacian(g);
    const auto d = laplacian_decomposition(l);
    const DenseMatrix x = random_signal(rng, n, 1 + rng.below(3));
    const auto spec = energy_spectrum(x, d);
    const double total = std::accumulate(spec.begin(), spec.end(), 0.0);
    CHECK(std::abs(total - dirichlet_energy(x, l)) <= 1e-8);
  }

  Graph g = random_graph(rng, 8, 0.4, true);
  const auto d = laplacian_decomposition(sym_laplacian(g));
  for (double v : energy_spectrum(fairres::testing::kernel_signal(g, 2), d))
    CHECK(std::abs(v) <= 1e-12);
}

TEST_CASE("transfer_function and passband_threshold") {
  const FilterSpec spec{0.5, -0.66667, 1, 1};
  CHECK(transfer_function(FilterSpec{0.3, -0.4, 5, 3}, 0.0) == 1.0);
  CHECK(std::abs(transfer_function(spec, 0.5) - 1.0) <= 1e-5);
  CHECK(transfer_function(spec, 2.0) == 0.0);

  CHECK(passband_threshold(0.25, -0.5) == 2.0);
  CHECK(std::abs(passband_threshold(0.5, -0.66667) - 0.5) <= 1e-4);
  CHECK_THROWS_AS(passband_threshold(0.0, -0.5), ContractError);
  CHECK_THROWS_AS(passband_threshold(0.5, 0.0), ContractError);

  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const double lambda = rng.uniform(0.01, 0.99);
    const double mu = -rng.uniform(0.01, 0.99);
    const double kpb = passband_threshold(lambda, mu);
    CHECK(std::abs(transfer_function(FilterSpec{lambda, mu, 1, 1}, kpb) - 1.0) <= 1e-6);
  }
}

TEST_CASE("energy_trace examples and monotonicity") {
  const SparseMatrix lap = sym_laplacian(k2());
  const DenseMatrix x(2, 1, {1, -1});
  const auto empty = energy_trace(x, lap, FairingSchedule{});
  REQUIRE(empty.points.size() == 1);
  CHECK(empty.points[0].iteration == 0);
  CHECK(empty.points[0].energy == 4.0);

  Rng rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng.below(18);
    Graph g = random_graph(rng, n, 0.3, true);
    const SparseMatrix l = sym_laplacian(g);
    const DenseMatrix x0 = random_signal(rng, n, 2);
    const auto sched = build_alternating_schedule(8, 0.5, -0.66667);
    const auto tr = energy_trace(x0, l, sched);
    REQUIRE(tr.points.size() == 9);
    DenseMatrix state = x0;
    for (std::size_t s = 0; s < sched.size(); ++s) {
      state = fairing_step(state, l, sched.steps()[s].coeff);
      // Matches a direct recomputation.
      CHECK(tr.points[s + 1].energy == doctest::Approx(dirichlet_energy(state, l)).epsilon(1e-12));
      const double before = tr.points[s].energy;
      const double after = tr.points[s + 1].energy;
      if (sched.steps()[s].kind == StepKind::Shrink) {
        CHECK(after <= before + 1e-9);
      } else {
        CHECK(after >= before - 1e-9);
      }
    }
    for (const auto& p : tr.points) CHECK(p.energy >= -1e-9);
  }
}

TEST_CASE("write_energy_csv format") {
  EnergyTrace t;
  t.graph_id = 7;
  t.points = {{0, 0.1}, {1, 2.0}};
  std::ostringstream out;
  write_energy_csv(out, std::span<const EnergyTrace>(&t, 1));
  CHECK(out.str() == "graph_id,iteration,energy\n7,0,0.10000000000000001\n7,1,2\n");
}

TEST_CASE("energy_step_identity") {
  const SparseMatrix lap = sym_laplacian(k2());
  const auto dec = laplacian_decomposition(lap);
  const DenseMatrix x(2, 1, {1, -1});
  const auto zero = energy_step_identity(x, lap, dec, 0.0);
  CHECK(std::abs(zero.lhs - 4.0) <= 1e-12);
  CHECK(std::abs(zero.rhs - 4.0) <= 1e-12);
  const auto half = energy_step_identity(x, lap, dec, 0.5);
  CHECK(half.lhs == 0.0);
  CHECK(std::abs(half.rhs) <= 1e-12);

  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + rng.below(20);
    Graph g = random_graph(rng, n, 0.3, false);
    const SparseMatrix l = sym_laplacian(g);
    const auto d = laplacian_decomposition(l);
    const DenseMatrix xr = random_signal(rng, n, 2);
    for (double coeff : {0.5, -0.66667}) {
      const auto s = energy_step_identity(xr, l, d, coeff);
      CHECK(std::abs(s.lhs - s.rhs) <= 1e-8 * std::max(1.0, s.lhs));
    }
  }
}

TEST_CASE("filtered energy law") {
  Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + rng.below(20);
    Graph g = random_graph(rng, n, 0.3, trial % 2 == 0);
    const SparseMatrix l = sym_laplacian(g);
    const auto d = laplacian_decomposition(l);
    const DenseMatrix x0 = random_signal(rng, n, 2);
    const auto e0 = energy_spectrum(x0, d);
    const double lambda = trial % 2 ? 0.5 : 0.25;
    const double mu = trial % 2 ? -0.66667 : -0.5;
    const auto sched = build_alternating_schedule(rng.below(11), lambda, mu);
    const auto f = fairing_reservoir(x0, l, sched);
    double predicted = 0.0;
    for (std::size_t w = 0; w < e0.size(); ++w) {
      const double gain = transfer_function(
          FilterSpec{lambda, mu, sched.num_shrink(), sched.num_unshrink()}, d.eigenvalues[w]);
      predicted += gain * gain * e0[w];
    }
    CHECK(std::abs(dirichlet_energy(f.block(f.num_blocks() - 1), l) - predicted) <= 1e-7);
  }
}

TEST_CASE("gradient of the Dirichlet energy is 2 lap x") {
  Rng rng(7);
  const double h = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.below(15);
    Graph g = random_graph(rng, n, 0.3, true);
    const SparseMatrix l = sym_laplacian(g);
    DenseMatrix x = random_signal(rng, n, 1);
    const DenseMatrix analytic = 2.0 * spmm(l, x);
    DenseMatrix numeric(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double keep = x(i, 0);
      x(i, 0) = keep + h;
      const double up = dirichlet_energy(x, l);
      x(i, 0) = keep - h;
      const double down = dirichlet_energy(x, l);
      x(i, 0) = keep;
      numeric(i, 0) = (up - down) / (2 * h);
    }
    const double rel = frobenius_norm(numeric - analytic) / std::max(1e-300, frobenius_norm(analytic));
    CHECK(rel <= 1e-5);
  }
}
