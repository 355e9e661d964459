#include "fairres/readout.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "fairres/errors.hpp"

namespace fairres {

std::vector<double> mean_pool(const MultiresFeatures& features) {
  const DenseMatrix& x = features.concatenated();
  if (x.rows() == 0) throw ContractError("mean_pool: graph has no nodes");
  std::vector<double> out(x.cols(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += row[c];
  }
  const double inv = 1.0 / static_cast<double>(x.rows());
  for (double& v : out) v *= inv;
  return out;
}

TrainConfig tuned_config(const std::string& dataset) {
  TrainConfig c;
  if (dataset == "PTC" || dataset == "PTC_MR") {
    c.epochs = 400;
    c.learning_rate = 0.0005;
    c.dropout = 0.6;
    c.weight_decay = 0.005;
    c.batch_size = 32;
    c.hidden = 15;
    c.k = 4;
  } else if (dataset == "NCI1") {
    c.epochs = 500;
    c.learning_rate = 0.001;
    c.dropout = 0.5;
    c.weight_decay = 0.0005;
    c.batch_size = 32;
    c.hidden = 100;
    c.k = 4;
  } else if (dataset == "PROTEINS") {
    c.epochs = 200;
    c.learning_rate = 0.001;
    c.dropout = 0.5;
    c.weight_decay = 0.0005;
    c.batch_size = 32;
    c.hidden = 50;
    c.k = 5;
  } else if (dataset == "ENZYMES") {
    c.epochs = 200;
    c.learning_rate = 0.001;
    c.dropout = 0.5;
    c.weight_decay = 0.0005;
    c.batch_size = 32;
    c.hidden = 100;
    c.k = 6;
  } else {
    throw ContractError("no default hyperparameters for dataset '" + dataset + "'");
  }
  return c;
}

bool ReadoutModel::all_finite() const {
  auto finite = [](double v) { return std::isfinite(v); };
  return w1.all_finite() && w2.all_finite() && std::all_of(b1.begin(), b1.end(), finite) &&
         std::all_of(b2.begin(), b2.end(), finite);
}

ReadoutModel init_readout(std::size_t input_dim, std::size_t hidden, std::size_t num_classes,
                          double dropout, Rng& rng) {
  if (input_dim == 0 || hidden == 0 || num_classes == 0) {
    throw ContractError("readout dimensions must be positive");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ContractError("dropout must lie in [0, 1)");
  ReadoutModel m;
  m.dropout = dropout;
  m.w1 = DenseMatrix(input_dim, hidden);
  m.w2 = DenseMatrix(hidden, num_classes);
  m.b1.assign(hidden, 0.0);
  m.b2.assign(num_classes, 0.0);
  const double r1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double r2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (double& v : m.w1.data()) v = rng.uniform(-r1, r1);
  for (double& v : m.w2.data()) v = rng.uniform(-r2, r2);
  return m;
}

namespace {

struct Activations {
  std::vector<double> pre;     // W1^T x + b1
  std::vector<double> scale;   // dropout multiplier per hidden unit
  std::vector<double> hidden;  // relu(pre) * scale
  std::vector<double> logits;
};

Activations run_forward(const ReadoutModel& model, std::span<const double> x, Mode mode,
                        Rng& rng) {
  if (x.size() != model.input_dim()) {
    throw StructuralError("readout input has " + std::to_string(x.size()) +
                          " entries, model expects " + std::to_string(model.input_dim()));
  }
  const std::size_t h = model.hidden();
  Activations a;
  a.pre = model.b1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    auto wrow = model.w1.row(i);
    for (std::size_t j = 0; j < h; ++j) a.pre[j] += xi * wrow[j];
  }
  a.scale.assign(h, 1.0);
  if (mode == Mode::Train && model.dropout > 0.0) {
    const double keep = 1.0 - model.dropout;
    for (double& s : a.scale) s = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
  }
  a.hidden.resize(h);
  for (std::size_t j = 0; j < h; ++j) a.hidden[j] = std::max(0.0, a.pre[j]) * a.scale[j];
  a.logits = model.b2;
  for (std::size_t j = 0; j < h; ++j) {
    const double hj = a.hidden[j];
    if (hj == 0.0) continue;
    auto wrow = model.w2.row(j);
    for (std::size_t c = 0; c < a.logits.size(); ++c) a.logits[c] += hj * wrow[c];
  }
  return a;
}

double squared_norm(const DenseMatrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return s;
}

}  // namespace

std::vector<double> forward(const ReadoutModel& model, std::span<const double> x, Mode mode,
                            Rng& rng) {
  return run_forward(model, x, mode, rng).logits;
}

std::vector<double> hidden_activation(const ReadoutModel& model, std::span<const double> x,
                                      Mode mode, Rng& rng) {
  return run_forward(model, x, mode, rng).hidden;
}

LossAndGrad loss_and_grad(const ReadoutModel& model, const DenseMatrix& x,
                          std::span<const int> y, double weight_decay, Rng& rng, Mode mode) {
  if (x.rows() == 0 || x.rows() != y.size()) {
    throw ContractError("loss_and_grad needs a non-empty batch with one label per row");
  }
  const std::size_t classes = model.num_classes();
  const std::size_t h = model.hidden();
  LossAndGrad out;
  out.grad.w1 = DenseMatrix(model.input_dim(), h);
  out.grad.w2 = DenseMatrix(h, classes);
  out.grad.b1.assign(h, 0.0);
  out.grad.b2.assign(classes, 0.0);

  const double inv_batch = 1.0 / static_cast<double>(x.rows());
  std::vector<double> dlogits(classes);
  std::vector<double> dpre(h);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const int label = y[r];
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw ContractError("class label " + std::to_string(label) + " out of range");
    }
    const auto xr = x.row(r);
    const Activations a = run_forward(model, xr, mode, rng);
    const double top = *std::max_element(a.logits.begin(), a.logits.end());
    double z = 0.0;
    for (double l : a.logits) z += std::exp(l - top);
    const double log_z = top + std::log(z);
    out.loss += (log_z - a.logits[static_cast<std::size_t>(label)]) * inv_batch;

    for (std::size_t c = 0; c < classes; ++c) {
      const double p = std::exp(a.logits[c] - log_z);
      dlogits[c] = (p - (static_cast<int>(c) == label ? 1.0 : 0.0)) * inv_batch;
      out.grad.b2[c] += dlogits[c];
    }
    for (std::size_t j = 0; j < h; ++j) {
      auto wrow = model.w2.row(j);
      auto grow = out.grad.w2.row(j);
      double dh = 0.0;
      for (std::size_t c = 0; c < classes; ++c) {
        grow[c] += a.hidden[j] * dlogits[c];
        dh += wrow[c] * dlogits[c];
      }
      dpre[j] = a.pre[j] > 0.0 ? dh * a.scale[j] : 0.0;
      out.grad.b1[j] += dpre[j];
    }
    for (std::size_t i = 0; i < xr.size(); ++i) {
      if (xr[i] == 0.0) continue;
      auto grow = out.grad.w1.row(i);
      for (std::size_t j = 0; j < h; ++j) grow[j] += xr[i] * dpre[j];
    }
  }

  if (weight_decay != 0.0) {
    out.loss += 0.5 * weight_decay * (squared_norm(model.w1) + squared_norm(model.w2));
    auto add_decay = [&](DenseMatrix& g, const DenseMatrix& w) {
      auto gd = g.data();
      auto wd = w.data();
      for (std::size_t i = 0; i < gd.size(); ++i) gd[i] += weight_decay * wd[i];
    };
    add_decay(out.grad.w1, model.w1);
    add_decay(out.grad.w2, model.w2);
  }
  return out;
}

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEps = 1e-8;

template <typename Fn>
void for_each_param(Fn&& fn, std::span<double> w1, std::span<double> b1, std::span<double> w2,
                    std::span<double> b2) {
  std::size_t offset = 0;
  for (auto block : {w1, b1, w2, b2}) {
    fn(block, offset);
    offset += block.size();
  }
}

}  // namespace

AdamOptimizer::AdamOptimizer(const ReadoutModel& shape, double learning_rate)
    : lr_(learning_rate) {
  const std::size_t n = shape.w1.data().size() + shape.b1.size() + shape.w2.data().size() +
                        shape.b2.size();
  m_.assign(n, 0.0);
  v_.assign(n, 0.0);
}

void AdamOptimizer::step(ReadoutModel& model, const ReadoutGradients& grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  std::vector<double> flat;
  flat.reserve(m_.size());
  for (auto g : {grad.w1.data(), std::span<const double>(grad.b1), grad.w2.data(),
                 std::span<const double>(grad.b2)}) {
    flat.insert(flat.end(), g.begin(), g.end());
  }
  if (flat.size() != m_.size()) throw StructuralError("gradient shape differs from model");
  for_each_param(
      [&](std::span<double> params, std::size_t offset) {
        for (std::size_t i = 0; i < params.size(); ++i) {
          const double g = flat[offset + i];
          double& m = m_[offset + i];
          double& v = v_[offset + i];
          m = kBeta1 * m + (1.0 - kBeta1) * g;
          v = kBeta2 * v + (1.0 - kBeta2) * g * g;
          params[i] -= lr_ * (m / c1) / (std::sqrt(v / c2) + kEps);
        }
      },
      model.w1.data(), model.b1, model.w2.data(), model.b2);
}

int predict(const ReadoutModel& model, std::span<const double> x) {
  Rng unused;
  const auto logits = forward(model, x, Mode::Eval, unused);
  return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

double accuracy(const ReadoutModel& model, const LabeledSet& set) {
  if (set.size() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < set.size(); ++r) hits += predict(model, set.x.row(r)) == set.y[r];
  return static_cast<double>(hits) / static_cast<double>(set.size());
}

TrainResult train_readout(const LabeledSet& train, const LabeledSet& val,
                          const LabeledSet& test, std::size_t num_classes,
                          const TrainConfig& config) {
  if (train.size() == 0 || val.size() == 0 || test.size() == 0) {
    throw ContractError("train_readout needs non-empty train, validation and test sets");
  }
  if (config.batch_size == 0) throw ContractError("batch size must be positive");
  Rng init_rng(derive_seed(config.seed, 1));
  Rng order_rng(derive_seed(config.seed, 2));
  Rng dropout_rng(derive_seed(config.seed, 3));

  TrainResult result{init_readout(train.x.cols(), config.hidden, num_classes, config.dropout,
                                  init_rng),
                     {}};
  AdamOptimizer opt(result.model, config.learning_rate);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      DenseMatrix bx(end - start, train.x.cols());
      std::vector<int> by(end - start);
      for (std::size_t b = start; b < end; ++b) {
        auto src = train.x.row(order[b]);
        std::copy(src.begin(), src.end(), bx.row(b - start).begin());
        by[b - start] = train.y[order[b]];
      }
      const LossAndGrad lg =
          loss_and_grad(result.model, bx, by, config.weight_decay, dropout_rng, Mode::Train);
      opt.step(result.model, lg.grad);
      loss_sum += lg.loss;
      ++batches;
    }
    if (!result.model.all_finite()) {
      throw NumericError("readout parameters became non-finite in epoch " + std::to_string(epoch));
    }
    result.history.push_back({loss_sum / static_cast<double>(batches),
                              accuracy(result.model, train), accuracy(result.model, val),
                              accuracy(result.model, test)});
  }
  return result;
}

namespace {

// Solves (A) x = b in place for symmetric positive definite A, one column of
// b at a time. Throws NumericError when A is not positive definite.
DenseMatrix cholesky_solve(DenseMatrix a, DenseMatrix b) {
  const std::size_t n = a.rows();
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
    if (!(d > 0.0)) throw NumericError("ridge system is not positive definite");
    a(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
      a(i, j) = s / a(j, j);
    }
  }
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = b(i, c);
      for (std::size_t k = 0; k < i; ++k) s -= a(i, k) * b(k, c);
      b(i, c) = s / a(i, i);
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = b(i, c);
      for (std::size_t k = i + 1; k < n; ++k) s -= a(k, i) * b(k, c);
      b(i, c) = s / a(i, i);
    }
  }
  return b;
}

}  // namespace

LinearModel linear_baseline(const LabeledSet& train, std::size_t num_classes, double ridge) {
  if (!(ridge > 0.0)) throw ContractError("ridge must be positive");
  if (train.size() == 0) throw ContractError("linear_baseline needs training data");
  const std::size_t n = train.size();
  const std::size_t d = train.x.cols();
  std::vector<double> xmean(d, 0.0);
  std::vector<double> ymean(num_classes, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) xmean[c] += train.x(r, c) / static_cast<double>(n);
    ymean.at(static_cast<std::size_t>(train.y[r])) += 1.0 / static_cast<double>(n);
  }
  DenseMatrix gram(d, d);
  DenseMatrix rhs(d, num_classes);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < d; ++i) {
      const double xi = train.x(r, i) - xmean[i];
      for (std::size_t j = 0; j < d; ++j) gram(i, j) += xi * (train.x(r, j) - xmean[j]);
      for (std::size_t c = 0; c < num_classes; ++c) {
        const double yc = (train.y[r] == static_cast<int>(c) ? 1.0 : 0.0) - ymean[c];
        rhs(i, c) += xi * yc;
      }
    }
  }
  for (std::size_t i = 0; i < d; ++i) gram(i, i) += ridge;

  LinearModel model;
  model.weights = cholesky_solve(std::move(gram), std::move(rhs));
  model.bias = ymean;
  for (std::size_t c = 0; c < num_classes; ++c)
    for (std::size_t i = 0; i < d; ++i) model.bias[c] -= model.weights(i, c) * xmean[i];
  return model;
}

int predict(const LinearModel& model, std::span<const double> x) {
  if (x.size() != model.weights.rows()) throw StructuralError("linear model input size differs");
  std::vector<double> resp = model.bias;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t c = 0; c < resp.size(); ++c) resp[c] += x[i] * model.weights(i, c);
  return static_cast<int>(std::max_element(resp.begin(), resp.end()) - resp.begin());
}

namespace {

constexpr const char* kCheckpointFormat = "fairres-readout";
constexpr int kCheckpointVersion = 1;

nlohmann::json matrix_json(const DenseMatrix& m) {
  return {{"rows", m.rows()},
          {"cols", m.cols()},
          {"data", std::vector<double>(m.data().begin(), m.data().end())}};
}

DenseMatrix matrix_from_json(const nlohmann::json& j) {
  return DenseMatrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                     j.at("data").get<std::vector<double>>());
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto& c = ckpt.config;
  nlohmann::json j = {
      {"format", kCheckpointFormat},
      {"version", kCheckpointVersion},
      {"config",
       {{"epochs", c.epochs},
        {"learning_rate", c.learning_rate},
        {"dropout", c.dropout},
        {"weight_decay", c.weight_decay},
        {"batch_size", c.batch_size},
        {"hidden", c.hidden},
        {"k", c.k},
        {"seed", c.seed}}},
      {"dropout", ckpt.model.dropout},
      {"w1", matrix_json(ckpt.model.w1)},
      {"b1", ckpt.model.b1},
      {"w2", matrix_json(ckpt.model.w2)},
      {"b2", ckpt.model.b2},
  };
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out << j.dump(1) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  if (j.value("format", "") != kCheckpointFormat || j.value("version", 0) != kCheckpointVersion) {
    throw ParseError(path.string(), 0, "not a version 1 readout checkpoint");
  }
  Checkpoint ck;
  const auto& c = j.at("config");
  ck.config.epochs = c.at("epochs").get<std::size_t>();
  ck.config.learning_rate = c.at("learning_rate").get<double>();
  ck.config.dropout = c.at("dropout").get<double>();
  ck.config.weight_decay = c.at("weight_decay").get<double>();
  ck.config.batch_size = c.at("batch_size").get<std::size_t>();
  ck.config.hidden = c.at("hidden").get<std::size_t>();
  ck.config.k = c.at("k").get<std::size_t>();
  ck.config.seed = c.at("seed").get<std::uint64_t>();
  ck.model.dropout = j.at("dropout").get<double>();
  ck.model.w1 = matrix_from_json(j.at("w1"));
  ck.model.b1 = j.at("b1").get<std::vector<double>>();
  ck.model.w2 = matrix_from_json(j.at("w2"));
  ck.model.b2 = j.at("b2").get<std::vector<double>>();
  if (ck.model.b1.size() != ck.model.hidden() || ck.model.w2.rows() != ck.model.hidden() ||
      ck.model.b2.size() != ck.model.num_classes()) {
    throw ParseError(path.string(), 0, "checkpoint parameter shapes are inconsistent");
  }
  return ck;
}

}  // namespace fairres
