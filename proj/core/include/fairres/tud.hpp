#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "fairres/dense.hpp"
#include "fairres/graph.hpp"

namespace fairres {

// A graph classification corpus in memory.
struct Dataset {
  std::string name;
  std::vector<Graph> graphs;
  // Dense 0-based class per graph.
  std::vector<int> graph_labels;
  std::size_t num_classes = 0;
  // Sorted distinct raw graph labels; class c corresponds to class_values[c].
  std::vector<int> class_values;
  // Sorted distinct node labels over the whole corpus.
  std::vector<int> label_alphabet;
};

struct DatasetStats {
  std::size_t num_graphs = 0;
  std::size_t total_nodes = 0;
  std::size_t total_undirected_edges = 0;
  std::size_t total_directed_pairs = 0;
  double avg_nodes_per_graph = 0.0;
  double avg_edges_per_graph = 0.0;
  std::size_t num_classes = 0;
  std::size_t num_node_labels = 0;
  std::size_t self_loops_stripped = 0;
};

// Reads <dir>/<name>_{A,graph_indicator,graph_labels,node_labels}.txt.
//
// Throws IoError naming the missing file and ParseError with the offending
// line for malformed content.
Dataset load_dataset(const std::filesystem::path& dir, const std::string& name);

// Locates a benchmark under a data root. Tries <root>/<name> and then the
// usual TUDataset directory name (PTC -> PTC_MR). Throws IoError naming the
// directory that was looked for.
Dataset load_named_dataset(const std::filesystem::path& root,
                           const std::string& name);

// Writes the four files in the same format load_dataset reads.
void save_dataset(const Dataset& d, const std::filesystem::path& dir);

DatasetStats dataset_stats(const Dataset& d);

// One row per node with a single 1 at the node label's alphabet position.
std::vector<SignalMatrix> one_hot_features(const Dataset& d);

}  // namespace fairres
