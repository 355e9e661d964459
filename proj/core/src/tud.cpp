#include "fairres/tud.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <string_view>

#include "fairres/errors.hpp"

namespace fairres {

namespace {

namespace fs = std::filesystem;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

long long parse_int(std::string_view token, const std::string& file, std::size_t line) {
  token = trim(token);
  long long value = 0;
  const char* begin = token.data();
  const char* end = token.data() + token.size();
  if (!token.empty() && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (token.empty() || ec != std::errc() || ptr != end) {
    throw ParseError(file, line, "expected an integer, got '" + std::string(token) + "'");
  }
  return value;
}

struct Line {
  std::size_t number;
  std::string text;
};

// Non-blank lines with their 1-based line numbers.
std::vector<Line> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Line> lines;
  std::string text;
  std::size_t number = 0;
  while (std::getline(in, text)) {
    ++number;
    if (trim(text).empty()) continue;
    lines.push_back({number, std::move(text)});
  }
  return lines;
}

std::vector<long long> read_int_column(const fs::path& path, std::vector<std::size_t>* numbers) {
  const auto lines = read_lines(path);
  std::vector<long long> out;
  out.reserve(lines.size());
  for (const auto& l : lines) {
    out.push_back(parse_int(l.text, path.filename().string(), l.number));
    if (numbers) numbers->push_back(l.number);
  }
  return out;
}

}  // namespace

Dataset load_dataset(const fs::path& dir, const std::string& name) {
  const fs::path a_path = dir / (name + "_A.txt");
  const fs::path ind_path = dir / (name + "_graph_indicator.txt");
  const fs::path gl_path = dir / (name + "_graph_labels.txt");
  const fs::path nl_path = dir / (name + "_node_labels.txt");
  for (const auto& p : {a_path, ind_path, gl_path, nl_path}) {
    if (!fs::is_regular_file(p)) throw IoError("missing dataset file " + p.string());
  }

  std::vector<std::size_t> ind_lines;
  const auto indicator = read_int_column(ind_path, &ind_lines);
  const auto raw_graph_labels = read_int_column(gl_path, nullptr);
  const auto node_labels = read_int_column(nl_path, nullptr);
  const std::string ind_name = ind_path.filename().string();

  const std::size_t num_nodes = indicator.size();
  const std::size_t num_graphs = raw_graph_labels.size();
  if (node_labels.size() != num_nodes) {
    throw ParseError(nl_path.filename().string(), node_labels.size(),
                     "has " + std::to_string(node_labels.size()) + " labels for " +
                         std::to_string(num_nodes) + " nodes");
  }

  // Graphs occupy contiguous, ascending blocks of node ids.
  std::vector<std::size_t> graph_start(num_graphs + 1, 0);
  for (std::size_t v = 0; v < num_nodes; ++v) {
    const long long gid = indicator[v];
    const long long prev = v == 0 ? 0 : indicator[v - 1];
    if (gid < 1 || gid > static_cast<long long>(num_graphs)) {
      throw ParseError(ind_name, ind_lines[v],
                       "graph id " + std::to_string(gid) + " outside 1.." +
                           std::to_string(num_graphs));
    }
    if (gid != prev && gid != prev + 1) {
      throw ParseError(ind_name, ind_lines[v], "graph ids must be contiguous and ascending");
    }
    if (gid != prev) graph_start[static_cast<std::size_t>(gid - 1)] = v;
  }
  if (num_graphs > 0 && (num_nodes == 0 || indicator.back() != static_cast<long long>(num_graphs))) {
    throw ParseError(ind_name, ind_lines.empty() ? 0 : ind_lines.back(),
                     "indicator covers fewer graphs than the " + std::to_string(num_graphs) +
                         " graph labels");
  }
  graph_start[num_graphs] = num_nodes;

  std::vector<std::vector<Edge>> edges(num_graphs);
  const std::string a_name = a_path.filename().string();
  for (const auto& l : read_lines(a_path)) {
    const std::string_view text = l.text;
    const auto comma = text.find(',');
    if (comma == std::string_view::npos) {
      throw ParseError(a_name, l.number, "expected 'i, j'");
    }
    const long long i = parse_int(text.substr(0, comma), a_name, l.number);
    const long long j = parse_int(text.substr(comma + 1), a_name, l.number);
    for (long long id : {i, j}) {
      if (id < 1 || id > static_cast<long long>(num_nodes)) {
        throw ParseError(a_name, l.number, "node " + std::to_string(id) + " outside 1.." +
                                               std::to_string(num_nodes));
      }
    }
    const auto gi = static_cast<std::size_t>(indicator[static_cast<std::size_t>(i - 1)] - 1);
    const auto gj = static_cast<std::size_t>(indicator[static_cast<std::size_t>(j - 1)] - 1);
    if (gi != gj) {
      throw ParseError(a_name, l.number,
                       "edge joins node " + std::to_string(i) + " of graph " +
                           std::to_string(gi + 1) + " with node " + std::to_string(j) +
                           " of graph " + std::to_string(gj + 1));
    }
    const std::size_t base = graph_start[gi];
    edges[gi].emplace_back(static_cast<std::size_t>(i - 1) - base,
                           static_cast<std::size_t>(j - 1) - base);
  }

  Dataset d;
  d.name = name;
  for (long long l : node_labels) d.label_alphabet.push_back(static_cast<int>(l));
  std::sort(d.label_alphabet.begin(), d.label_alphabet.end());
  d.label_alphabet.erase(std::unique(d.label_alphabet.begin(), d.label_alphabet.end()),
                         d.label_alphabet.end());

  for (long long l : raw_graph_labels) d.class_values.push_back(static_cast<int>(l));
  std::sort(d.class_values.begin(), d.class_values.end());
  d.class_values.erase(std::unique(d.class_values.begin(), d.class_values.end()),
                       d.class_values.end());
  d.num_classes = d.class_values.size();
  for (long long l : raw_graph_labels) {
    const auto it = std::lower_bound(d.class_values.begin(), d.class_values.end(), l);
    d.graph_labels.push_back(static_cast<int>(it - d.class_values.begin()));
  }

  d.graphs.reserve(num_graphs);
  for (std::size_t gidx = 0; gidx < num_graphs; ++gidx) {
    const std::size_t begin = graph_start[gidx];
    const std::size_t end = graph_start[gidx + 1];
    std::vector<int> labels;
    labels.reserve(end - begin);
    for (std::size_t v = begin; v < end; ++v) labels.push_back(static_cast<int>(node_labels[v]));
    d.graphs.push_back(build_graph(end - begin, edges[gidx], labels));
  }
  return d;
}

Dataset load_named_dataset(const fs::path& root, const std::string& name) {
  static const std::map<std::string, std::string> aliases = {{"PTC", "PTC_MR"}};
  std::vector<std::string> candidates{name};
  if (auto it = aliases.find(name); it != aliases.end()) candidates.push_back(it->second);
  for (const auto& c : candidates) {
    if (fs::is_directory(root / c)) {
      Dataset d = load_dataset(root / c, c);
      d.name = name;
      return d;
    }
  }
  throw IoError("dataset directory not found: " + (root / name).string());
}

void save_dataset(const Dataset& d, const fs::path& dir) {
  fs::create_directories(dir);
  auto open = [&](const std::string& suffix) {
    std::ofstream out(dir / (d.name + suffix));
    if (!out) throw IoError("cannot write " + (dir / (d.name + suffix)).string());
    return out;
  };
  std::ofstream a = open("_A.txt");
  std::ofstream ind = open("_graph_indicator.txt");
  std::ofstream gl = open("_graph_labels.txt");
  std::ofstream nl = open("_node_labels.txt");
  std::size_t base = 1;
  for (std::size_t gidx = 0; gidx < d.graphs.size(); ++gidx) {
    const Graph& g = d.graphs[gidx];
    for (std::size_t u = 0; u < g.num_nodes(); ++u) {
      for (std::size_t v : g.neighbors(u)) a << base + u << ", " << base + v << '\n';
      ind << gidx + 1 << '\n';
      nl << g.node_labels()[u] << '\n';
    }
    gl << d.class_values.at(static_cast<std::size_t>(d.graph_labels[gidx])) << '\n';
    base += g.num_nodes();
  }
}

DatasetStats dataset_stats(const Dataset& d) {
  DatasetStats s;
  s.num_graphs = d.graphs.size();
  for (const auto& g : d.graphs) {
    s.total_nodes += g.num_nodes();
    s.total_undirected_edges += g.num_edges();
    s.self_loops_stripped += g.self_loops_stripped();
  }
  s.total_directed_pairs = 2 * s.total_undirected_edges;
  if (s.num_graphs > 0) {
    s.avg_nodes_per_graph =
        static_cast<double>(s.total_nodes) / static_cast<double>(s.num_graphs);
    s.avg_edges_per_graph =
        static_cast<double>(s.total_undirected_edges) / static_cast<double>(s.num_graphs);
  }
  s.num_classes = d.num_classes;
  s.num_node_labels = d.label_alphabet.size();
  return s;
}

std::vector<SignalMatrix> one_hot_features(const Dataset& d) {
  if (d.label_alphabet.empty()) throw ContractError("one_hot_features: empty label alphabet");
  const std::size_t dim = d.label_alphabet.size();
  std::vector<SignalMatrix> out;
  out.reserve(d.graphs.size());
  for (const auto& g : d.graphs) {
    SignalMatrix x(g.num_nodes(), dim);
    for (std::size_t v = 0; v < g.num_nodes(); ++v) {
      const int label = g.node_labels()[v];
      const auto it = std::lower_bound(d.label_alphabet.begin(), d.label_alphabet.end(), label);
      if (it == d.label_alphabet.end() || *it != label) {
        throw StructuralError("node label " + std::to_string(label) + " missing from alphabet");
      }
      x(v, static_cast<std::size_t>(it - d.label_alphabet.begin())) = 1.0;
    }
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace fairres
