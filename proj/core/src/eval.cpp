#include "fairres/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "fairres/errors.hpp"
#include "fairres/graph.hpp"
#include "fairres/numfmt.hpp"
#include "fairres/rng.hpp"

namespace fairres {

namespace {

// Runs body(i) for i in [0, count) on up to `jobs` threads. The first
// exception thrown by any job is rethrown on the calling thread.
template <typename Body>
void parallel_for(std::size_t count, std::size_t jobs, Body&& body) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> workers;
  workers.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<FoldSplit> make_splits(std::span<const int> labels, std::size_t num_classes,
                                   std::size_t num_folds, std::size_t num_runs,
                                   double val_fraction, std::uint64_t seed) {
  if (num_folds < 2) throw ContractError("need at least two folds");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw ContractError("validation fraction must lie in (0, 1)");
  }
  std::vector<std::vector<std::size_t>> members(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int c = labels[i];
    if (c < 0 || static_cast<std::size_t>(c) >= num_classes) {
      throw ContractError("label " + std::to_string(c) + " out of range");
    }
    members[static_cast<std::size_t>(c)].push_back(i);
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (members[c].size() < num_folds) {
      throw ContractError("class " + std::to_string(c) + " has " +
                          std::to_string(members[c].size()) + " members, fewer than " +
                          std::to_string(num_folds) + " folds");
    }
  }

  std::vector<FoldSplit> splits;
  splits.reserve(num_runs * num_folds);
  for (std::size_t run = 0; run < num_runs; ++run) {
    Rng rng(derive_seed(seed, run));
    // fold_of[i]: held-out fold of sample i; classes dealt round-robin.
    std::vector<std::size_t> fold_of(labels.size());
    std::vector<std::vector<std::size_t>> shuffled = members;
    std::size_t offset = 0;
    for (auto& cls : shuffled) {
      rng.shuffle(std::span<std::size_t>(cls));
      for (std::size_t p = 0; p < cls.size(); ++p) fold_of[cls[p]] = (offset + p) % num_folds;
      offset += cls.size();
    }
    for (std::size_t fold = 0; fold < num_folds; ++fold) {
      FoldSplit s;
      s.run = run;
      s.fold = fold;
      Rng val_rng(derive_seed(seed, run, fold + 1));
      for (const auto& cls : shuffled) {
        std::vector<std::size_t> rest;
        for (std::size_t i : cls) {
          if (fold_of[i] == fold) {
            s.test.push_back(i);
          } else {
            rest.push_back(i);
          }
        }
        val_rng.shuffle(std::span<std::size_t>(rest));
        const auto n_val = static_cast<std::size_t>(
            std::floor(val_fraction * static_cast<double>(rest.size()) + 0.5));
        s.val.insert(s.val.end(), rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(n_val));
        s.train.insert(s.train.end(), rest.begin() + static_cast<std::ptrdiff_t>(n_val), rest.end());
      }
      std::sort(s.train.begin(), s.train.end());
      std::sort(s.val.begin(), s.val.end());
      std::sort(s.test.begin(), s.test.end());
      splits.push_back(std::move(s));
    }
  }
  return splits;
}

EpochChoice select_epoch(std::span<const EpochRecord> history) {
  if (history.empty()) throw ContractError("select_epoch needs at least one epoch");
  std::size_t best = 0;
  for (std::size_t e = 1; e < history.size(); ++e) {
    if (history[e].val_accuracy >= history[best].val_accuracy) best = e;
  }
  return {best, history[best].test_accuracy};
}

CvResult summarize(std::vector<FoldOutcome> folds, std::size_t num_runs) {
  CvResult r;
  r.per_run_means.assign(num_runs, 0.0);
  std::vector<std::size_t> counts(num_runs, 0);
  for (const auto& f : folds) {
    if (f.run >= num_runs) throw ContractError("fold outcome has run index out of range");
    r.per_run_means[f.run] += f.test_accuracy;
    ++counts[f.run];
  }
  for (std::size_t i = 0; i < num_runs; ++i) {
    if (counts[i] == 0) throw ContractError("run " + std::to_string(i) + " has no folds");
    r.per_run_means[i] /= static_cast<double>(counts[i]);
  }
  for (double m : r.per_run_means) r.mean += m;
  r.mean /= static_cast<double>(num_runs);
  if (num_runs > 1) {
    double ss = 0.0;
    for (double m : r.per_run_means) ss += (m - r.mean) * (m - r.mean);
    r.sample_std = std::sqrt(ss / static_cast<double>(num_runs - 1));
  }
  r.folds = std::move(folds);
  return r;
}

DenseMatrix graph_features(const Dataset& d, ReservoirKind kind, std::size_t k, double lambda,
                           double mu, std::size_t jobs) {
  const auto inputs = one_hot_features(d);
  const FairingSchedule schedule = kind == ReservoirKind::Fairing
                                       ? build_alternating_schedule(k, lambda, mu)
                                       : FairingSchedule{};
  const std::size_t width = (k + 1) * d.label_alphabet.size();
  DenseMatrix out(d.graphs.size(), width);
  parallel_for(d.graphs.size(), jobs, [&](std::size_t gi) {
    const SparseMatrix lap = sym_laplacian(d.graphs[gi]);
    const MultiresFeatures f = kind == ReservoirKind::Fairing
                                   ? fairing_reservoir(inputs[gi], lap, schedule)
                                   : tanh_reservoir(inputs[gi], lap, k);
    const auto pooled = mean_pool(f);
    std::copy(pooled.begin(), pooled.end(), out.row(gi).begin());
  });
  return out;
}

namespace {

LabeledSet gather(const DenseMatrix& features, std::span<const int> labels,
                  std::span<const std::size_t> idx) {
  LabeledSet s{DenseMatrix(idx.size(), features.cols()), {}};
  s.y.reserve(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    auto src = features.row(idx[r]);
    std::copy(src.begin(), src.end(), s.x.row(r).begin());
    s.y.push_back(labels[idx[r]]);
  }
  return s;
}

}  // namespace

TrainResult train_fold(const Dataset& d, const DenseMatrix& features, const FoldSplit& split,
                       const TrainConfig& base) {
  if (features.rows() != d.graphs.size()) {
    throw StructuralError("feature matrix has " + std::to_string(features.rows()) +
                          " rows for " + std::to_string(d.graphs.size()) + " graphs");
  }
  TrainConfig tc = base;
  tc.seed = derive_seed(base.seed, split.run + 1, split.fold + 1);
  return train_readout(gather(features, d.graph_labels, split.train),
                       gather(features, d.graph_labels, split.val),
                       gather(features, d.graph_labels, split.test), d.num_classes, tc);
}

CvResult run_protocol(const Dataset& d, const ProtocolConfig& config) {
  const DenseMatrix features = graph_features(d, config.reservoir, config.train.k, config.lambda,
                                              config.mu, config.jobs);
  const auto splits = make_splits(d.graph_labels, d.num_classes, config.num_folds,
                                  config.num_runs, config.val_fraction, config.train.seed);
  std::vector<FoldOutcome> outcomes(splits.size());
  parallel_for(splits.size(), config.jobs, [&](std::size_t i) {
    const FoldSplit& s = splits[i];
    const TrainResult tr = train_fold(d, features, s, config.train);
    const EpochChoice choice = select_epoch(tr.history);
    outcomes[i] = {s.run, s.fold, choice.epoch, choice.test_accuracy};
  });
  return summarize(std::move(outcomes), config.num_runs);
}

void write_cv_csv(std::ostream& out, const CvResult& result) {
  out << "run,fold,selected_epoch,test_accuracy\n";
  for (const auto& f : result.folds) {
    out << f.run << ',' << f.fold << ',' << f.selected_epoch << ','
        << format_double(f.test_accuracy) << '\n';
  }
}

void write_cv_summary(std::ostream& out, const CvResult& result) {
  nlohmann::json j = {{"mean", result.mean},
                      {"sample_std", result.sample_std},
                      {"per_run_means", result.per_run_means}};
  out << j.dump(2) << '\n';
}

}  // namespace fairres
