#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <ostream>

#include <CLI11.hpp>

#include "fairres/errors.hpp"
#include "fairres/eval.hpp"
#include "fairres/fairing.hpp"
#include "fairres/graph.hpp"
#include "fairres/numfmt.hpp"
#include "fairres/readout.hpp"
#include "fairres/spectral.hpp"
#include "fairres/tud.hpp"
#include "fairres/walks.hpp"

#ifndef FAIRRES_VERSION
#define FAIRRES_VERSION "unknown"
#endif

namespace fairres::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
T field(const json& cfg, const char* key) {
  if (!cfg.contains(key)) throw ContractError(std::string("configuration lacks '") + key + "'");
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw ContractError(std::string("configuration field '") + key + "' has the wrong type");
  }
}

class Outputs {
 public:
  explicit Outputs(const fs::path& dir) : dir_(fs::absolute(dir).lexically_normal()) {
    fs::create_directories(dir_);
  }

  // Registers an output written by someone else.
  fs::path reserve(const std::string& name) {
    const fs::path p = dir_ / name;
    written_.push_back(p.string());
    return p;
  }

  std::ofstream open(const std::string& name) {
    const fs::path p = reserve(name);
    std::ofstream f(p, std::ios::binary);
    if (!f) throw IoError("cannot write " + p.string());
    return f;
  }

  void manifest(const std::string& command, const json& config) const {
    json m = {{"tool", "fairres"},
              {"version", FAIRRES_VERSION},
              {"command", command},
              {"seed", config.value("seed", std::uint64_t{0})},
              {"dataset", config.contains("dataset") ? config["dataset"] : json(nullptr)},
              {"config", config},
              {"outputs", written_}};
    const fs::path p = dir_ / (command + ".manifest.json");
    std::ofstream f(p, std::ios::binary);
    if (!f) throw IoError("cannot write " + p.string());
    f << m.dump(2) << '\n';
  }

 private:
  fs::path dir_;
  std::vector<std::string> written_;
};

Dataset dataset_from(const json& cfg) {
  return load_named_dataset(field<std::string>(cfg, "data_root"), field<std::string>(cfg, "dataset"));
}

ReservoirKind reservoir_from(const json& cfg) {
  const auto r = field<std::string>(cfg, "reservoir");
  if (r == "fairing") return ReservoirKind::Fairing;
  if (r == "tanh") return ReservoirKind::Tanh;
  throw ContractError("unknown reservoir '" + r + "'");
}

TrainConfig train_from(const json& cfg) {
  TrainConfig t;
  t.epochs = field<std::size_t>(cfg, "epochs");
  t.learning_rate = field<double>(cfg, "learning_rate");
  t.dropout = field<double>(cfg, "dropout");
  t.weight_decay = field<double>(cfg, "weight_decay");
  t.batch_size = field<std::size_t>(cfg, "batch_size");
  t.hidden = field<std::size_t>(cfg, "hidden");
  t.k = field<std::size_t>(cfg, "k");
  t.seed = field<std::uint64_t>(cfg, "seed");
  return t;
}

int cmd_stats(const json& cfg, Outputs& outs, std::ostream& out) {
  const Dataset d = dataset_from(cfg);
  const DatasetStats s = dataset_stats(d);
  const json j = {{"dataset", d.name},
                  {"num_graphs", s.num_graphs},
                  {"num_nodes", s.total_nodes},
                  {"num_undirected_edges", s.total_undirected_edges},
                  {"num_directed_pairs", s.total_directed_pairs},
                  {"avg_nodes_per_graph", s.avg_nodes_per_graph},
                  {"avg_edges_per_graph", s.avg_edges_per_graph},
                  {"num_classes", s.num_classes},
                  {"num_node_labels", s.num_node_labels},
                  {"self_loops_stripped", s.self_loops_stripped}};
  outs.open("stats.json") << j.dump(2) << '\n';
  out << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_filter(const json& cfg, Outputs& outs, std::ostream& out) {
  const FilterSpec spec{field<double>(cfg, "lambda"), field<double>(cfg, "mu"),
                        field<unsigned>(cfg, "n"), field<unsigned>(cfg, "m")};
  spec.validate();
  const auto samples = field<std::size_t>(cfg, "samples");
  if (samples < 2) throw ContractError("--samples must be at least 2");
  const double kpb = passband_threshold(spec.lambda, spec.mu);

  auto csv = outs.open("filter.csv");
  csv << "omega,gain,energy_gain\n";
  for (std::size_t i = 0; i < samples; ++i) {
    const double omega = 2.0 * static_cast<double>(i) / static_cast<double>(samples - 1);
    const double f = transfer_function(spec, omega);
    csv << format_double(omega) << ',' << format_double(f) << ',' << format_double(f * f) << '\n';
  }
  const json j = {{"lambda", spec.lambda}, {"mu", spec.mu}, {"n", spec.n},
                  {"m", spec.m},           {"k_pb", kpb},   {"gain_at_k_pb", transfer_function(spec, kpb)}};
  outs.open("filter.json") << j.dump(2) << '\n';
  out << "k_pb " << format_double(kpb) << '\n';
  return kExitOk;
}

int cmd_energy_trace(const json& cfg, Outputs& outs, std::ostream& out) {
  const Dataset d = dataset_from(cfg);
  const auto schedule = build_alternating_schedule(field<std::size_t>(cfg, "k"),
                                                   field<double>(cfg, "lambda"), field<double>(cfg, "mu"));
  auto ids = field<std::vector<std::size_t>>(cfg, "graph_ids");
  if (ids.empty()) {
    ids.resize(d.graphs.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  }
  const auto inputs = one_hot_features(d);
  std::vector<EnergyTrace> traces;
  traces.reserve(ids.size());
  for (std::size_t id : ids) {
    if (id >= d.graphs.size()) {
      throw ContractError("graph id " + std::to_string(id) + " out of range (dataset has " +
                          std::to_string(d.graphs.size()) + " graphs)");
    }
    traces.push_back(energy_trace(inputs[id], sym_laplacian(d.graphs[id]), schedule, id));
  }
  auto csv = outs.open("energy_trace.csv");
  write_energy_csv(csv, traces);
  out << "traced " << traces.size() << " graphs\n";
  return kExitOk;
}

int cmd_embed(const json& cfg, Outputs& outs, std::ostream& out) {
  const Dataset d = dataset_from(cfg);
  const DenseMatrix f = graph_features(d, reservoir_from(cfg), field<std::size_t>(cfg, "k"),
                                       field<double>(cfg, "lambda"), field<double>(cfg, "mu"),
                                       field<std::size_t>(cfg, "jobs"));
  auto csv = outs.open("embeddings.csv");
  csv << "graph_id,label";
  for (std::size_t c = 0; c < f.cols(); ++c) csv << ",f" << c;
  csv << '\n';
  for (std::size_t r = 0; r < f.rows(); ++r) {
    csv << r << ',' << d.class_values[static_cast<std::size_t>(d.graph_labels[r])];
    for (double v : f.row(r)) csv << ',' << format_double(v);
    csv << '\n';
  }
  out << "embedded " << f.rows() << " graphs into " << f.cols() << " dimensions\n";
  return kExitOk;
}

int cmd_train(const json& cfg, Outputs& outs, std::ostream& out) {
  const Dataset d = dataset_from(cfg);
  const TrainConfig tc = train_from(cfg);
  const auto run = field<std::size_t>(cfg, "run");
  const auto fold = field<std::size_t>(cfg, "fold");
  const auto folds = field<std::size_t>(cfg, "folds");
  if (fold >= folds) throw ContractError("--fold must be below --folds");
  const auto splits = make_splits(d.graph_labels, d.num_classes, folds, run + 1,
                                  field<double>(cfg, "val_fraction"), tc.seed);
  const DenseMatrix features = graph_features(d, reservoir_from(cfg), tc.k, field<double>(cfg, "lambda"),
                                              field<double>(cfg, "mu"), field<std::size_t>(cfg, "jobs"));
  const TrainResult tr = train_fold(d, features, splits[run * folds + fold], tc);

  auto hist = outs.open("history.csv");
  hist << "epoch,train_loss,train_accuracy,val_accuracy,test_accuracy\n";
  for (std::size_t e = 0; e < tr.history.size(); ++e) {
    const auto& h = tr.history[e];
    hist << e << ',' << format_double(h.train_loss) << ',' << format_double(h.train_accuracy) << ','
         << format_double(h.val_accuracy) << ',' << format_double(h.test_accuracy) << '\n';
  }
  save_checkpoint(outs.reserve("checkpoint.json"), {tr.model, tc});
  if (!tr.history.empty()) {
    const EpochChoice c = select_epoch(tr.history);
    out << "selected epoch " << c.epoch << " test accuracy " << format_double(c.test_accuracy) << '\n';
  }
  return kExitOk;
}

int cmd_cv(const json& cfg, Outputs& outs, std::ostream& out) {
  const Dataset d = dataset_from(cfg);
  ProtocolConfig pc;
  pc.train = train_from(cfg);
  pc.reservoir = reservoir_from(cfg);
  pc.lambda = field<double>(cfg, "lambda");
  pc.mu = field<double>(cfg, "mu");
  pc.num_folds = field<std::size_t>(cfg, "folds");
  pc.num_runs = field<std::size_t>(cfg, "runs");
  pc.val_fraction = field<double>(cfg, "val_fraction");
  pc.jobs = field<std::size_t>(cfg, "jobs");
  const CvResult r = run_protocol(d, pc);
  auto csv = outs.open("cv.csv");
  write_cv_csv(csv, r);
  auto summary = outs.open("cv_summary.json");
  write_cv_summary(summary, r);
  out << d.name << " accuracy " << format_double(r.mean) << " +- " << format_double(r.sample_std)
      << '\n';
  return kExitOk;
}

int cmd_verify_walks(const json& cfg, Outputs& outs, std::ostream& out) {
  WalkVerifyOptions opts;
  opts.max_nodes = field<std::size_t>(cfg, "max_nodes");
  opts.max_k = field<std::size_t>(cfg, "max_k");
  opts.corrupt_transition = field<bool>(cfg, "corrupt_transition");
  const WalkVerifyReport report = verify_walks(opts);
  json checks = json::array();
  for (const auto& c : report.checks) {
    out << (c.passed() ? "PASS " : "FAIL ") << c.name << "  cases=" << c.cases
        << " max_error=" << format_double(c.max_error) << " tol=" << format_double(c.tolerance) << '\n';
    checks.push_back({{"name", c.name},
                      {"cases", c.cases},
                      {"max_error", c.max_error},
                      {"tolerance", c.tolerance},
                      {"passed", c.passed()}});
  }
  out << report.graphs << " graphs, " << (report.passed() ? "all checks passed" : "verification FAILED")
      << '\n';
  const json j = {{"graphs", report.graphs}, {"passed", report.passed()}, {"checks", checks}};
  outs.open("verify_walks.json") << j.dump(2) << '\n';
  return report.passed() ? kExitOk : kExitVerifyFailed;
}

std::string resolve_data_root(const std::string& flag) {
  if (!flag.empty()) return fs::absolute(flag).lexically_normal().string();
  if (const char* env = std::getenv("FAIRRES_DATA_ROOT"); env != nullptr && *env != '\0') {
    return fs::absolute(env).lexically_normal().string();
  }
  throw IoError("no dataset root: pass --data-root or set FAIRRES_DATA_ROOT");
}

}  // namespace

int execute(const std::string& command, const json& config, const fs::path& out_dir,
            std::ostream& out) {
  const json& cfg = config;
  Outputs outs(out_dir);
  int code = kExitOk;
  if (command == "stats") {
    code = cmd_stats(cfg, outs, out);
  } else if (command == "filter") {
    code = cmd_filter(cfg, outs, out);
  } else if (command == "energy-trace") {
    code = cmd_energy_trace(cfg, outs, out);
  } else if (command == "embed") {
    code = cmd_embed(cfg, outs, out);
  } else if (command == "train") {
    code = cmd_train(cfg, outs, out);
  } else if (command == "cv") {
    code = cmd_cv(cfg, outs, out);
  } else if (command == "verify-walks") {
    code = cmd_verify_walks(cfg, outs, out);
  } else {
    throw ContractError("unknown command '" + command + "'");
  }
  outs.manifest(command, cfg);
  return code;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fairing graph reservoir toolkit", "fairres"};
  app.require_subcommand(1);
  app.set_version_flag("--version", FAIRRES_VERSION);

  std::string data_root;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  app.add_option("--data-root", data_root, "Dataset root (overrides FAIRRES_DATA_ROOT)");
  app.add_option("--out-dir", out_dir, "Directory for outputs and the run manifest");
  app.add_option("--seed", seed, "Base random seed");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.fallthrough();

  std::string dataset;
  double lambda = kDefaultShrink;
  double mu = kDefaultUnshrink;
  std::size_t k = 4;
  std::string reservoir = "fairing";

  auto* stats = app.add_subcommand("stats", "Dataset statistics");
  stats->add_option("--dataset", dataset)->required();

  unsigned n_shrink = 1, m_unshrink = 1;
  std::size_t samples = 201;
  auto* filter = app.add_subcommand("filter", "Transfer function and pass-band threshold");
  filter->add_option("--lambda", lambda);
  filter->add_option("--mu", mu);
  filter->add_option("--n", n_shrink, "Shrink steps");
  filter->add_option("--m", m_unshrink, "Unshrink steps");
  filter->add_option("--samples", samples, "Frequencies sampled over [0, 2]");

  std::vector<std::size_t> graph_ids;
  auto* energy = app.add_subcommand("energy-trace", "Dirichlet energy after each fairing step");
  energy->add_option("--dataset", dataset)->required();
  energy->add_option("--graph-ids", graph_ids, "Comma-separated graph indices (default: all)")
      ->delimiter(',');
  energy->add_option("--lambda", lambda);
  energy->add_option("--mu", mu);
  energy->add_option("--k", k, "Fairing steps");

  auto* embed = app.add_subcommand("embed", "Mean-pooled reservoir embeddings");
  embed->add_option("--dataset", dataset)->required();
  embed->add_option("--reservoir", reservoir)->check(CLI::IsMember({"fairing", "tanh"}));
  embed->add_option("--lambda", lambda);
  embed->add_option("--mu", mu);
  embed->add_option("--k", k, "Reservoir depth");

  // Training flags shared by train and cv; unset ones fall back to the
  // per-dataset defaults.
  TrainConfig tc;
  std::size_t folds = 10, runs = 5, run_index = 0, fold_index = 0;
  double val_fraction = 0.1;
  struct TrainFlags {
    CLI::Option *epochs, *lr, *dropout, *wd, *batch, *hidden, *k;
  };
  auto add_train_flags = [&](CLI::App* sub) {
    sub->add_option("--dataset", dataset)->required();
    sub->add_option("--reservoir", reservoir)->check(CLI::IsMember({"fairing", "tanh"}));
    sub->add_option("--lambda", lambda);
    sub->add_option("--mu", mu);
    sub->add_option("--folds", folds)->check(CLI::Range(2, 1000));
    sub->add_option("--val-fraction", val_fraction);
    return TrainFlags{sub->add_option("--epochs", tc.epochs),
                      sub->add_option("--lr", tc.learning_rate),
                      sub->add_option("--dropout", tc.dropout),
                      sub->add_option("--weight-decay", tc.weight_decay),
                      sub->add_option("--batch-size", tc.batch_size),
                      sub->add_option("--hidden", tc.hidden),
                      sub->add_option("--k", tc.k)};
  };
  auto* train = app.add_subcommand("train", "Train one readout on one cross-validation split");
  const TrainFlags train_flags = add_train_flags(train);
  train->add_option("--run", run_index);
  train->add_option("--fold", fold_index);
  auto* cv = app.add_subcommand("cv", "Repeated stratified cross-validation");
  const TrainFlags cv_flags = add_train_flags(cv);
  cv->add_option("--runs", runs)->check(CLI::PositiveNumber);

  std::size_t max_nodes = 6, max_k = 4;
  bool corrupt = false;
  auto* walks = app.add_subcommand("verify-walks", "Check walk expansions against matrix algebra");
  walks->add_option("--max-nodes", max_nodes);
  walks->add_option("--max-k", max_k);
  walks->add_flag("--corrupt-transition", corrupt)->group("");  // test hook

  std::string manifest_path;
  auto* replay = app.add_subcommand("replay", "Re-run a command from its manifest");
  replay->add_option("--manifest", manifest_path)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    json cfg = {{"seed", seed}};

    if (command == "replay") {
      std::ifstream in(manifest_path);
      json m;
      try {
        m = json::parse(in);
      } catch (const json::exception& e) {
        throw ParseError(manifest_path, 0, e.what());
      }
      if (m.value("tool", "") != "fairres" || !m.contains("command") || !m.contains("config")) {
        throw ParseError(manifest_path, 0, "not a fairres run manifest");
      }
      return execute(m["command"].get<std::string>(), m["config"], out_dir, out);
    }

    if (command == "stats" || command == "energy-trace" || command == "embed" ||
        command == "train" || command == "cv") {
      cfg["dataset"] = dataset;
      cfg["data_root"] = resolve_data_root(data_root);
    }
    if (command == "filter") {
      cfg.update({{"lambda", lambda}, {"mu", mu}, {"n", n_shrink}, {"m", m_unshrink}, {"samples", samples}});
    } else if (command == "energy-trace") {
      cfg.update({{"lambda", lambda}, {"mu", mu}, {"k", k}, {"graph_ids", graph_ids}});
    } else if (command == "embed") {
      cfg.update({{"reservoir", reservoir}, {"lambda", lambda}, {"mu", mu}, {"k", k}, {"jobs", jobs}});
    } else if (command == "train" || command == "cv") {
      const TrainFlags& f = command == "train" ? train_flags : cv_flags;
      TrainConfig base;
      try {
        base = tuned_config(dataset);
      } catch (const ContractError&) {
        // no tuned defaults for this dataset
      }
      if (f.epochs->count() > 0) base.epochs = tc.epochs;
      if (f.lr->count() > 0) base.learning_rate = tc.learning_rate;
      if (f.dropout->count() > 0) base.dropout = tc.dropout;
      if (f.wd->count() > 0) base.weight_decay = tc.weight_decay;
      if (f.batch->count() > 0) base.batch_size = tc.batch_size;
      if (f.hidden->count() > 0) base.hidden = tc.hidden;
      if (f.k->count() > 0) base.k = tc.k;
      cfg.update({{"reservoir", reservoir},
                  {"lambda", lambda},
                  {"mu", mu},
                  {"epochs", base.epochs},
                  {"learning_rate", base.learning_rate},
                  {"dropout", base.dropout},
                  {"weight_decay", base.weight_decay},
                  {"batch_size", base.batch_size},
                  {"hidden", base.hidden},
                  {"k", base.k},
                  {"folds", folds},
                  {"val_fraction", val_fraction},
                  {"jobs", jobs}});
      if (command == "train") {
        cfg.update({{"run", run_index}, {"fold", fold_index}});
      } else {
        cfg["runs"] = runs;
      }
    } else if (command == "verify-walks") {
      cfg.update({{"max_nodes", max_nodes}, {"max_k", max_k}, {"corrupt_transition", corrupt}});
    }
    return execute(command, cfg, out_dir, out);
  } catch (const std::invalid_argument& e) {  // StructuralError, ContractError
    err << "error: " << e.what() << '\n';
  } catch (const std::runtime_error& e) {  // IoError, ParseError, NumericError, filesystem
    err << "error: " << e.what() << '\n';
  }
  return kExitInputError;
}

}  // namespace fairres::cli
