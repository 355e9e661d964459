#include "fairres/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "fairres/errors.hpp"
#include "fairres/numfmt.hpp"

namespace fairres {

namespace {

constexpr int kMaxSweeps = 100;

void rotate(DenseMatrix& a, DenseMatrix& v, std::size_t p, std::size_t q) {
  const double apq = a(p, q);
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const std::size_t n = a.rows();
  for (std::size_t k = 0; k < n; ++k) {
    const double akp = a(k, p);
    const double akq = a(k, q);
    a(k, p) = c * akp - s * akq;
    a(k, q) = s * akp + c * akq;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double apk = a(p, k);
    const double aqk = a(q, k);
    a(p, k) = c * apk - s * aqk;
    a(q, k) = s * apk + c * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double vkp = v(k, p);
    const double vkq = v(k, q);
    v(k, p) = c * vkp - s * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
}

}  // namespace

SpectralDecomposition eig_sym(const DenseMatrix& input) {
  const std::size_t n = input.rows();
  if (input.cols() != n) throw ContractError("eig_sym: matrix is not square");
  if (n > kMaxDenseNodes) {
    throw ContractError("eig_sym: " + std::to_string(n) + " rows exceeds the dense cap of " +
                        std::to_string(kMaxDenseNodes));
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(input(i, j) - input(j, i)) > 1e-10) {
        throw ContractError("eig_sym: matrix is not symmetric");
      }

  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (input(i, j) + input(j, i));
  DenseMatrix v = DenseMatrix::identity(n);

  const double target = 1e-12 * frobenius_norm(a);
  int sweep = 0;
  while (off_diagonal_norm(a) > target) {
    if (sweep++ == kMaxSweeps) throw NumericError("eig_sym: Jacobi sweeps did not converge");
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q)
        if (a(p, q) != 0.0) rotate(a, v, p, q);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors = DenseMatrix(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t src = order[c];
    out.eigenvalues[c] = a(src, src);
    // Sign convention: the largest-magnitude component is positive.
    std::size_t lead = 0;
    for (std::size_t r = 1; r < n; ++r)
      if (std::abs(v(r, src)) > std::abs(v(lead, src))) lead = r;
    const double sign = v(lead, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, c) = sign * v(r, src);
  }
  return out;
}

SpectralDecomposition laplacian_decomposition(const SparseMatrix& lap) {
  SpectralDecomposition dec = eig_sym(lap.to_dense());
  for (double& w : dec.eigenvalues) {
    if (w < 0.0 && w >= -1e-9) w = 0.0;
    if (w > 2.0 && w <= 2.0 + 1e-9) w = 2.0;
  }
  return dec;
}

double dirichlet_energy(const SignalMatrix& x, const SparseMatrix& lap) {
  const DenseMatrix lx = spmm(lap, x);
  double e = 0.0;
  auto xd = x.data();
  auto ld = lx.data();
  for (std::size_t i = 0; i < xd.size(); ++i) e += xd[i] * ld[i];
  return e;
}

std::vector<double> energy_spectrum(const SignalMatrix& x, const SpectralDecomposition& decomp) {
  const DenseMatrix& u = decomp.eigenvectors;
  if (u.rows() != x.rows()) throw StructuralError("energy_spectrum: signal size differs");
  std::vector<double> out(decomp.eigenvalues.size(), 0.0);
  for (std::size_t w = 0; w < out.size(); ++w) {
    double mass = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) {
      double proj = 0.0;
      for (std::size_t r = 0; r < x.rows(); ++r) proj += u(r, w) * x(r, j);
      mass += proj * proj;
    }
    out[w] = decomp.eigenvalues[w] * mass;
  }
  return out;
}

double transfer_function(const FilterSpec& spec, double omega) {
  return std::pow(1.0 - spec.lambda * omega, static_cast<double>(spec.n)) *
         std::pow(1.0 - spec.mu * omega, static_cast<double>(spec.m));
}

double passband_threshold(double lambda, double mu) {
  if (lambda == 0.0 || mu == 0.0) {
    throw ContractError("pass-band threshold needs non-zero coefficients");
  }
  return 1.0 / lambda + 1.0 / mu;
}

EnergyTrace energy_trace(const SignalMatrix& x0, const SparseMatrix& lap,
                         const FairingSchedule& schedule, std::size_t graph_id) {
  EnergyTrace trace;
  trace.graph_id = graph_id;
  trace.points.push_back({0, dirichlet_energy(x0, lap)});
  SignalMatrix state = x0;
  std::size_t it = 0;
  for (const auto& step : schedule.steps()) {
    state = fairing_step(state, lap, step.coeff);
    trace.points.push_back({++it, dirichlet_energy(state, lap)});
  }
  return trace;
}

void write_energy_csv(std::ostream& out, std::span<const EnergyTrace> traces) {
  out << "graph_id,iteration,energy\n";
  for (const auto& tr : traces)
    for (const auto& p : tr.points)
      out << tr.graph_id << ',' << p.iteration << ',' << format_double(p.energy) << '\n';
}

EnergyStep energy_step_identity(const SignalMatrix& x, const SparseMatrix& lap,
                                const SpectralDecomposition& decomp, double coeff) {
  EnergyStep s{};
  s.lhs = dirichlet_energy(fairing_step(x, lap, coeff), lap);
  const auto spectrum = energy_spectrum(x, decomp);
  s.rhs = 0.0;
  for (std::size_t w = 0; w < spectrum.size(); ++w) {
    const double f = 1.0 - coeff * decomp.eigenvalues[w];
    s.rhs += f * f * spectrum[w];
  }
  return s;
}

}  // namespace fairres
