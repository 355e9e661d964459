#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "fairres/dense.hpp"
#include "fairres/fairing.hpp"
#include "fairres/sparse.hpp"

namespace fairres {

// Eigenpairs of a symmetric matrix, ascending. Column i of eigenvectors
// belongs to eigenvalues[i].
struct SpectralDecomposition {
  std::vector<double> eigenvalues;
  DenseMatrix eigenvectors;
};

// Cyclic Jacobi. Throws ContractError for non-square or non-symmetric input
// (asymmetry above 1e-10) or more than kMaxDenseNodes rows, and NumericError
// if the sweep cap is hit before the off-diagonal norm drops below
// 1e-12 times the input norm.
SpectralDecomposition eig_sym(const DenseMatrix& a);

// eig_sym of a normalized Laplacian with eigenvalues within 1e-9 of 0 or 2
// clamped onto the bound.
SpectralDecomposition laplacian_decomposition(const SparseMatrix& lap);

// tr(X^T lap X).
double dirichlet_energy(const SignalMatrix& x, const SparseMatrix& lap);

// E_w(X) = w * sum_j (u_w^T x_j)^2 for every eigenpair, in decomposition order.
std::vector<double> energy_spectrum(const SignalMatrix& x,
                                    const SpectralDecomposition& decomp);

// Signal gain (1 - lambda w)^n (1 - mu w)^m.
double transfer_function(const FilterSpec& spec, double omega);

// 1/lambda + 1/mu.
double passband_threshold(double lambda, double mu);

struct EnergyPoint {
  std::size_t iteration;
  double energy;
};

struct EnergyTrace {
  std::size_t graph_id = 0;
  std::vector<EnergyPoint> points;
};

EnergyTrace energy_trace(const SignalMatrix& x0, const SparseMatrix& lap,
                         const FairingSchedule& schedule, std::size_t graph_id = 0);

// Header `graph_id,iteration,energy`, 17 significant digits.
void write_energy_csv(std::ostream& out, std::span<const EnergyTrace> traces);

struct EnergyStep {
  double lhs;  // energy of (I - coeff lap) X, computed directly
  double rhs;  // sum_w (1 - coeff w)^2 E_w(X)
};

EnergyStep energy_step_identity(const SignalMatrix& x, const SparseMatrix& lap,
                                const SpectralDecomposition& decomp, double coeff);

}  // namespace fairres
