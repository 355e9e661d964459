#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fairres/dense.hpp"
#include "fairres/sparse.hpp"

namespace fairres {

inline constexpr double kDefaultShrink = 0.5;
inline constexpr double kDefaultUnshrink = -0.66667;

// Shrink coefficient lambda applied n times, unshrink coefficient mu m times.
struct FilterSpec {
  double lambda = kDefaultShrink;
  double mu = kDefaultUnshrink;
  unsigned n = 0;
  unsigned m = 0;

  // Throws ContractError unless -1 < mu < 0 < lambda < 1.
  void validate() const;
};

enum class StepKind { Shrink, Unshrink };

struct FairingStep {
  StepKind kind;
  double coeff;
};

class FairingSchedule {
 public:
  FairingSchedule() = default;
  // Throws ContractError if a Shrink coefficient is not positive or an
  // Unshrink coefficient is not negative.
  explicit FairingSchedule(std::vector<FairingStep> steps);

  std::span<const FairingStep> steps() const { return steps_; }
  std::size_t size() const { return steps_.size(); }
  bool empty() const { return steps_.empty(); }
  unsigned num_shrink() const;
  unsigned num_unshrink() const;

 private:
  std::vector<FairingStep> steps_;
};

// Shrink(lambda), Unshrink(mu), Shrink(lambda), ... of length k.
FairingSchedule build_alternating_schedule(std::size_t k, double lambda, double mu);

// Reservoir states [X^(0), ..., X^(k)] for one graph.
class MultiresFeatures {
 public:
  explicit MultiresFeatures(SignalMatrix x0);

  void push(const SignalMatrix& state);

  std::size_t num_blocks() const { return num_blocks_; }
  std::size_t block_dim() const { return block_dim_; }
  std::size_t num_nodes() const { return concat_.rows(); }
  SignalMatrix block(std::size_t t) const;
  // num_nodes x (k + 1) * block_dim, blocks side by side.
  const DenseMatrix& concatenated() const { return concat_; }

 private:
  DenseMatrix concat_;
  std::size_t block_dim_ = 0;
  std::size_t num_blocks_ = 0;
};

// (I - coeff * lap) x. No nonlinearity.
SignalMatrix fairing_step(const SignalMatrix& x, const SparseMatrix& lap, double coeff);

MultiresFeatures fairing_reservoir(const SignalMatrix& x0, const SparseMatrix& lap,
                                   const FairingSchedule& schedule);

// X^(t+1) = tanh(lap X^(t)).
MultiresFeatures tanh_reservoir(const SignalMatrix& x0, const SparseMatrix& lap,
                                std::size_t k);

inline constexpr std::size_t kMaxDenseNodes = 512;

// U diag(f(w)) U^T x0 with f the filter transfer function, computed through a
// dense eigendecomposition of lap_dense. Oracle for fairing_reservoir.
SignalMatrix closed_form_filter(const SignalMatrix& x0, const DenseMatrix& lap_dense,
                                const FilterSpec& spec);

}  // namespace fairres
