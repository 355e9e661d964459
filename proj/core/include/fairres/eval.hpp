#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "fairres/fairing.hpp"
#include "fairres/readout.hpp"
#include "fairres/tud.hpp"

namespace fairres {

struct FoldSplit {
  std::size_t run = 0;
  std::size_t fold = 0;
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

// Stratified num_folds-fold splits for each of num_runs runs. Inside each
// fold, a stratified val_fraction of the training side becomes validation.
// Throws ContractError naming the class if one has fewer than num_folds members.
std::vector<FoldSplit> make_splits(std::span<const int> labels, std::size_t num_classes,
                                   std::size_t num_folds, std::size_t num_runs,
                                   double val_fraction, std::uint64_t seed);

struct EpochChoice {
  std::size_t epoch;
  double test_accuracy;
};

// Latest epoch among those with the highest validation accuracy.
EpochChoice select_epoch(std::span<const EpochRecord> history);

struct FoldOutcome {
  std::size_t run = 0;
  std::size_t fold = 0;
  std::size_t selected_epoch = 0;
  double test_accuracy = 0.0;
};

struct CvResult {
  std::vector<FoldOutcome> folds;
  std::vector<double> per_run_means;
  double mean = 0.0;
  double sample_std = 0.0;
};

// Mean of per-run means and their sample standard deviation (n - 1).
CvResult summarize(std::vector<FoldOutcome> folds, std::size_t num_runs);

enum class ReservoirKind { Fairing, Tanh };

struct ProtocolConfig {
  TrainConfig train;
  ReservoirKind reservoir = ReservoirKind::Fairing;
  double lambda = kDefaultShrink;
  double mu = kDefaultUnshrink;
  std::size_t num_folds = 10;
  std::size_t num_runs = 5;
  double val_fraction = 0.1;
  std::size_t jobs = 1;
};

// Mean-pooled multiresolution features, one row per graph.
DenseMatrix graph_features(const Dataset& d, ReservoirKind kind, std::size_t k,
                           double lambda, double mu, std::size_t jobs = 1);

// Trains the readout for one split of `features` (one row per graph of d),
// seeding it from base.seed and the split's run and fold as run_protocol does.
TrainResult train_fold(const Dataset& d, const DenseMatrix& features, const FoldSplit& split,
                       const TrainConfig& base);

// Full cross-validation: reservoir features once per graph, then a readout
// per (run, fold) with validation-based epoch selection.
CvResult run_protocol(const Dataset& d, const ProtocolConfig& config);

// `run,fold,selected_epoch,test_accuracy`.
void write_cv_csv(std::ostream& out, const CvResult& result);
// {"mean": ..., "sample_std": ..., "per_run_means": [...]}.
void write_cv_summary(std::ostream& out, const CvResult& result);

}  // namespace fairres
