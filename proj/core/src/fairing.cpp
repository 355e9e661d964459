#include "fairres/fairing.hpp"

#include <cmath>
#include <string>

#include "fairres/errors.hpp"
#include "fairres/spectral.hpp"

namespace fairres {

void FilterSpec::validate() const {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw ContractError("shrink coefficient must lie in (0, 1), got " + std::to_string(lambda));
  }
  if (!(mu > -1.0 && mu < 0.0)) {
    throw ContractError("unshrink coefficient must lie in (-1, 0), got " + std::to_string(mu));
  }
}

FairingSchedule::FairingSchedule(std::vector<FairingStep> steps) : steps_(std::move(steps)) {
  for (const auto& s : steps_) {
    if (!std::isfinite(s.coeff)) throw ContractError("non-finite fairing coefficient");
    if (s.kind == StepKind::Shrink && !(s.coeff > 0.0)) {
      throw ContractError("shrink step needs a positive coefficient");
    }
    if (s.kind == StepKind::Unshrink && !(s.coeff < 0.0)) {
      throw ContractError("unshrink step needs a negative coefficient");
    }
  }
}

unsigned FairingSchedule::num_shrink() const {
  unsigned n = 0;
  for (const auto& s : steps_) n += s.kind == StepKind::Shrink ? 1 : 0;
  return n;
}

unsigned FairingSchedule::num_unshrink() const {
  return static_cast<unsigned>(steps_.size()) - num_shrink();
}

FairingSchedule build_alternating_schedule(std::size_t k, double lambda, double mu) {
  FilterSpec{lambda, mu, 0, 0}.validate();
  std::vector<FairingStep> steps;
  steps.reserve(k);
  for (std::size_t t = 0; t < k; ++t) {
    if (t % 2 == 0) {
      steps.push_back({StepKind::Shrink, lambda});
    } else {
      steps.push_back({StepKind::Unshrink, mu});
    }
  }
  return FairingSchedule(std::move(steps));
}

MultiresFeatures::MultiresFeatures(SignalMatrix x0)
    : concat_(std::move(x0)), block_dim_(concat_.cols()), num_blocks_(1) {}

void MultiresFeatures::push(const SignalMatrix& state) {
  if (state.rows() != concat_.rows() || state.cols() != block_dim_) {
    throw StructuralError("reservoir state shape differs from the input signal");
  }
  DenseMatrix grown(concat_.rows(), concat_.cols() + block_dim_);
  for (std::size_t r = 0; r < concat_.rows(); ++r) {
    auto dst = grown.row(r);
    auto old = concat_.row(r);
    auto add = state.row(r);
    std::copy(old.begin(), old.end(), dst.begin());
    std::copy(add.begin(), add.end(), dst.begin() + static_cast<std::ptrdiff_t>(old.size()));
  }
  concat_ = std::move(grown);
  ++num_blocks_;
}

SignalMatrix MultiresFeatures::block(std::size_t t) const {
  if (t >= num_blocks_) throw StructuralError("reservoir block index out of range");
  SignalMatrix b(concat_.rows(), block_dim_);
  for (std::size_t r = 0; r < concat_.rows(); ++r) {
    auto src = concat_.row(r).subspan(t * block_dim_, block_dim_);
    std::copy(src.begin(), src.end(), b.row(r).begin());
  }
  return b;
}

SignalMatrix fairing_step(const SignalMatrix& x, const SparseMatrix& lap, double coeff) {
  if (!std::isfinite(coeff)) throw ContractError("non-finite fairing coefficient");
  return apply_identity_minus(lap, coeff, x);
}

MultiresFeatures fairing_reservoir(const SignalMatrix& x0, const SparseMatrix& lap,
                                   const FairingSchedule& schedule) {
  if (lap.num_cols() != x0.rows()) {
    throw StructuralError("fairing_reservoir: operator and signal sizes differ");
  }
  MultiresFeatures out(x0);
  SignalMatrix state = x0;
  for (const auto& step : schedule.steps()) {
    state = fairing_step(state, lap, step.coeff);
    out.push(state);
  }
  return out;
}

MultiresFeatures tanh_reservoir(const SignalMatrix& x0, const SparseMatrix& lap,
                                std::size_t k) {
  if (lap.num_cols() != x0.rows()) {
    throw StructuralError("tanh_reservoir: operator and signal sizes differ");
  }
  MultiresFeatures out(x0);
  SignalMatrix state = x0;
  for (std::size_t t = 0; t < k; ++t) {
    state = spmm(lap, state);
    for (double& v : state.data()) v = std::tanh(v);
    out.push(state);
  }
  return out;
}

SignalMatrix closed_form_filter(const SignalMatrix& x0, const DenseMatrix& lap_dense,
                                const FilterSpec& spec) {
  spec.validate();
  if (lap_dense.rows() != x0.rows()) {
    throw StructuralError("closed_form_filter: operator and signal sizes differ");
  }
  const SpectralDecomposition dec = eig_sym(lap_dense);
  const DenseMatrix& u = dec.eigenvectors;
  // coefficients c = diag(f) U^T x0, then x = U c
  DenseMatrix coeffs = matmul(u.transpose(), x0);
  for (std::size_t i = 0; i < coeffs.rows(); ++i) {
    const double gain = transfer_function(spec, dec.eigenvalues[i]);
    for (double& v : coeffs.row(i)) v *= gain;
  }
  return matmul(u, coeffs);
}

}  // namespace fairres
