#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fairres/dense.hpp"
#include "fairres/fairing.hpp"
#include "fairres/rng.hpp"

namespace fairres {

// Graph-level vectors with their classes; row i of x belongs to y[i].
struct LabeledSet {
  DenseMatrix x;
  std::vector<int> y;

  std::size_t size() const { return y.size(); }
};

// Column-wise mean over nodes of the concatenated reservoir states.
std::vector<double> mean_pool(const MultiresFeatures& features);

struct TrainConfig {
  std::size_t epochs = 200;
  double learning_rate = 1e-3;
  double dropout = 0.5;
  double weight_decay = 5e-4;
  std::size_t batch_size = 32;
  std::size_t hidden = 100;
  std::size_t k = 4;
  std::uint64_t seed = 0;
};

// Tuned per-benchmark hyperparameters. Accepts PTC, PTC_MR, NCI1, PROTEINS
// and ENZYMES; throws ContractError otherwise.
TrainConfig tuned_config(const std::string& dataset);

// Two fully connected layers with a rectifier in between:
// logits = W2^T relu(W1^T x + b1) + b2.
struct ReadoutModel {
  DenseMatrix w1;  // input_dim x hidden
  std::vector<double> b1;
  DenseMatrix w2;  // hidden x num_classes
  std::vector<double> b2;
  double dropout = 0.0;

  std::size_t input_dim() const { return w1.rows(); }
  std::size_t hidden() const { return w1.cols(); }
  std::size_t num_classes() const { return w2.cols(); }
  bool all_finite() const;

  friend bool operator==(const ReadoutModel&, const ReadoutModel&) = default;
};

// Weights uniform in +-1/sqrt(fan_in), biases zero.
ReadoutModel init_readout(std::size_t input_dim, std::size_t hidden,
                          std::size_t num_classes, double dropout, Rng& rng);

enum class Mode { Train, Eval };

// Train mode applies inverted dropout to the hidden layer with masks drawn
// from rng; Eval mode applies neither dropout nor scaling and leaves rng alone.
std::vector<double> forward(const ReadoutModel& model, std::span<const double> x,
                            Mode mode, Rng& rng);

// Hidden activations after the (optional) dropout mask.
std::vector<double> hidden_activation(const ReadoutModel& model,
                                      std::span<const double> x, Mode mode, Rng& rng);

struct ReadoutGradients {
  DenseMatrix w1;
  std::vector<double> b1;
  DenseMatrix w2;
  std::vector<double> b2;
};

struct LossAndGrad {
  double loss = 0.0;
  ReadoutGradients grad;
};

// Mean softmax cross-entropy over rows of x plus (weight_decay / 2) times the
// squared norm of both weight matrices. Dropout masks are sampled from rng in
// row order when mode is Train.
LossAndGrad loss_and_grad(const ReadoutModel& model, const DenseMatrix& x,
                          std::span<const int> y, double weight_decay, Rng& rng,
                          Mode mode = Mode::Train);

// Adam with decay rates 0.9 / 0.999 and epsilon 1e-8.
class AdamOptimizer {
 public:
  AdamOptimizer(const ReadoutModel& shape, double learning_rate);
  void step(ReadoutModel& model, const ReadoutGradients& grad);

 private:
  double lr_;
  std::uint64_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

int predict(const ReadoutModel& model, std::span<const double> x);
double accuracy(const ReadoutModel& model, const LabeledSet& set);

struct EpochRecord {
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct TrainResult {
  ReadoutModel model;
  std::vector<EpochRecord> history;
};

// Mini-batch Adam over shuffled batches for config.epochs epochs; accuracy of
// all three splits is recorded after every epoch. Throws ContractError for
// an empty split.
TrainResult train_readout(const LabeledSet& train, const LabeledSet& val,
                          const LabeledSet& test, std::size_t num_classes,
                          const TrainConfig& config);

// Closed-form ridge regression on one-hot targets with an unpenalized bias.
struct LinearModel {
  DenseMatrix weights;  // input_dim x num_classes
  std::vector<double> bias;
};

LinearModel linear_baseline(const LabeledSet& train, std::size_t num_classes,
                            double ridge);
// Argmax of the linear response, lowest index on ties.
int predict(const LinearModel& model, std::span<const double> x);

struct Checkpoint {
  ReadoutModel model;
  TrainConfig config;
};

// JSON document with a format tag and version. Doubles survive exactly.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fairres
