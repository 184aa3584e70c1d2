#include "nodefeat/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "nodefeat/error.hpp"
#include "nodefeat/log.hpp"
#include "nodefeat/rng.hpp"

namespace nodefeat {

Graph::Graph(std::size_t num_nodes, std::vector<Edge> edges, int label,
             std::optional<std::vector<int>> node_labels, std::size_t id)
    : id_(id), label_(label), edges_(std::move(edges)), neighbors_(num_nodes),
      node_labels_(std::move(node_labels)) {
  for (auto& e : edges_) {
    if (e.u >= num_nodes || e.v >= num_nodes) {
      throw Error(ErrorKind::MalformedDataset,
                  "edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                      ") out of range for " + std::to_string(num_nodes) + " nodes");
    }
    if (e.u == e.v) {
      throw Error(ErrorKind::MalformedDataset, "self-loop at node " + std::to_string(e.u));
    }
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges_.begin(), edges_.end());
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
    throw Error(ErrorKind::MalformedDataset, "duplicate edge");
  }
  for (const auto& e : edges_) {
    neighbors_[e.u].push_back(e.v);
    neighbors_[e.v].push_back(e.u);
  }
  for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());
  if (node_labels_ && node_labels_->size() != num_nodes) {
    throw Error(ErrorKind::MalformedDataset, "node label count does not match node count");
  }
}

bool Graph::has_edge(NodeId a, NodeId b) const {
  const auto& nb = neighbors_[a];
  return std::binary_search(nb.begin(), nb.end(), b);
}

Graph Graph::permuted(std::span<const NodeId> perm) const {
  const std::size_t n = num_nodes();
  if (perm.size() != n) throw Error(ErrorKind::InvalidArgument, "permutation size mismatch");
  std::vector<NodeId> inverse(n);
  for (std::size_t k = 0; k < n; ++k) inverse[perm[k]] = static_cast<NodeId>(k);
  std::vector<Edge> edges;
  edges.reserve(edges_.size());
  for (const auto& e : edges_) edges.push_back({inverse[e.u], inverse[e.v]});
  std::optional<std::vector<int>> labels;
  if (node_labels_) {
    labels.emplace(n);
    for (std::size_t k = 0; k < n; ++k) (*labels)[k] = (*node_labels_)[perm[k]];
  }
  return Graph(n, std::move(edges), label_, std::move(labels), id_);
}

std::size_t Dataset::total_nodes() const {
  std::size_t total = 0;
  for (const auto& g : graphs) total += g.num_nodes();
  return total;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

long long parse_integer(std::string_view token, const std::string& where) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  long long value = 0;
  const auto* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (token.empty() || ec != std::errc() || ptr != end) {
    throw Error(ErrorKind::MalformedDataset,
                where + ": expected integer, got '" + std::string(token) + "'");
  }
  return value;
}

std::ifstream open_required(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  return in;
}

/// One integer per non-blank line.
std::vector<long long> read_integer_column(const std::filesystem::path& path) {
  auto in = open_required(path);
  std::vector<long long> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    values.push_back(parse_integer(body, path.filename().string() + ":" + std::to_string(line_no)));
  }
  return values;
}

/// Sorted distinct values and, for each input value, its 0-based code.
std::pair<std::vector<long long>, std::vector<int>> encode(const std::vector<long long>& raw) {
  std::vector<long long> alphabet(raw.begin(), raw.end());
  std::sort(alphabet.begin(), alphabet.end());
  alphabet.erase(std::unique(alphabet.begin(), alphabet.end()), alphabet.end());
  std::vector<int> codes(raw.size());
  for (std::size_t k = 0; k < raw.size(); ++k) {
    codes[k] = static_cast<int>(std::lower_bound(alphabet.begin(), alphabet.end(), raw[k]) -
                                alphabet.begin());
  }
  return {std::move(alphabet), std::move(codes)};
}

}  // namespace

Dataset parse_tudataset(const std::filesystem::path& dir, const std::string& name) {
  const auto file = [&](const char* suffix) { return dir / (name + suffix); };

  const auto indicator = read_integer_column(file("_graph_indicator.txt"));
  const auto raw_graph_labels = read_integer_column(file("_graph_labels.txt"));
  auto edge_in = open_required(file("_A.txt"));

  std::optional<std::vector<long long>> raw_node_labels;
  if (std::filesystem::exists(file("_node_labels.txt"))) {
    raw_node_labels = read_integer_column(file("_node_labels.txt"));
    if (raw_node_labels->size() != indicator.size()) {
      throw Error(ErrorKind::MalformedDataset, "node label count " +
                                                   std::to_string(raw_node_labels->size()) +
                                                   " != indicator count " +
                                                   std::to_string(indicator.size()));
    }
  }

  const std::size_t num_graphs = raw_graph_labels.size();
  if (num_graphs == 0) throw Error(ErrorKind::MalformedDataset, "no graph labels");

  // Global node k -> (graph index, local index).
  std::vector<std::size_t> node_graph(indicator.size());
  std::vector<NodeId> node_local(indicator.size());
  std::vector<std::size_t> graph_sizes(num_graphs, 0);
  for (std::size_t k = 0; k < indicator.size(); ++k) {
    const long long g = indicator[k];
    if (g < 1 || static_cast<std::size_t>(g) > num_graphs) {
      throw Error(ErrorKind::MalformedDataset,
                  "graph indicator " + std::to_string(g) + " outside 1.." +
                      std::to_string(num_graphs) + " at node " + std::to_string(k + 1));
    }
    node_graph[k] = static_cast<std::size_t>(g - 1);
    node_local[k] = static_cast<NodeId>(graph_sizes[node_graph[k]]++);
  }
  for (std::size_t g = 0; g < num_graphs; ++g) {
    if (graph_sizes[g] == 0) {
      throw Error(ErrorKind::MalformedDataset, "graph " + std::to_string(g + 1) + " has no nodes");
    }
  }

  // Direction bits per undirected edge: 1 = listed as (low, high), 2 = (high, low).
  std::vector<std::map<std::pair<NodeId, NodeId>, unsigned>> edge_dirs(num_graphs);
  std::size_t self_loops = 0;
  std::string line;
  std::size_t line_no = 0;
  const std::string a_name = name + "_A.txt";
  while (std::getline(edge_in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto comma = body.find(',');
    const std::string where = a_name + ":" + std::to_string(line_no);
    if (comma == std::string_view::npos) {
      throw Error(ErrorKind::MalformedDataset, where + ": expected 'i, j'");
    }
    const long long a = parse_integer(body.substr(0, comma), where);
    const long long b = parse_integer(body.substr(comma + 1), where);
    const auto in_range = [&](long long x) {
      return x >= 1 && static_cast<std::size_t>(x) <= indicator.size();
    };
    if (!in_range(a) || !in_range(b)) {
      throw Error(ErrorKind::MalformedDataset,
                  where + ": node id beyond indicator count " + std::to_string(indicator.size()));
    }
    const std::size_t ga = node_graph[a - 1];
    if (ga != node_graph[b - 1]) {
      throw Error(ErrorKind::MalformedDataset, where + ": edge crosses two graphs");
    }
    if (a == b) {
      ++self_loops;
      continue;
    }
    const NodeId la = node_local[a - 1];
    const NodeId lb = node_local[b - 1];
    const auto key = std::minmax(la, lb);
    edge_dirs[ga][{key.first, key.second}] |= (la < lb) ? 1u : 2u;
  }
  if (self_loops > 0) {
    log::warn(name + ": dropped " + std::to_string(self_loops) + " self-loop line(s)");
  }

  Dataset ds;
  ds.name = name;
  auto [class_values, class_codes] = encode(raw_graph_labels);
  ds.class_values = std::move(class_values);

  std::vector<int> node_codes;
  if (raw_node_labels) {
    auto [values, codes] = encode(*raw_node_labels);
    ds.node_label_values = std::move(values);
    ds.node_label_alphabet = ds.node_label_values.size();
    node_codes = std::move(codes);
  }

  std::vector<std::vector<int>> labels_per_graph(num_graphs);
  if (raw_node_labels) {
    for (std::size_t g = 0; g < num_graphs; ++g) labels_per_graph[g].resize(graph_sizes[g]);
    for (std::size_t k = 0; k < indicator.size(); ++k) {
      labels_per_graph[node_graph[k]][node_local[k]] = node_codes[k];
    }
  }

  std::size_t one_sided = 0;
  ds.graphs.reserve(num_graphs);
  for (std::size_t g = 0; g < num_graphs; ++g) {
    std::vector<Edge> edges;
    edges.reserve(edge_dirs[g].size());
    for (const auto& [key, dirs] : edge_dirs[g]) {
      if (dirs != 3u) ++one_sided;
      edges.push_back({key.first, key.second});
    }
    std::optional<std::vector<int>> labels;
    if (raw_node_labels) labels = std::move(labels_per_graph[g]);
    ds.graphs.emplace_back(graph_sizes[g], std::move(edges), class_codes[g], std::move(labels),
                           g + 1);
  }
  if (one_sided > 0) {
    log::warn(name + ": " + std::to_string(one_sided) +
              " edge(s) listed in one direction only; accepted as undirected");
  }
  return ds;
}

void write_tudataset(const Dataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto open = [&](const char* suffix) {
    const auto path = dir / (dataset.name + suffix);
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
    return out;
  };
  auto a_out = open("_A.txt");
  auto ind_out = open("_graph_indicator.txt");
  auto gl_out = open("_graph_labels.txt");
  std::ofstream nl_out;
  if (dataset.has_node_labels()) nl_out = open("_node_labels.txt");

  std::size_t offset = 0;
  for (std::size_t g = 0; g < dataset.graphs.size(); ++g) {
    const Graph& graph = dataset.graphs[g];
    for (std::size_t n = 0; n < graph.num_nodes(); ++n) {
      ind_out << (g + 1) << '\n';
      if (dataset.has_node_labels()) nl_out << (*graph.node_labels())[n] << '\n';
    }
    for (const auto& e : graph.edges()) {
      a_out << (offset + e.u + 1) << ", " << (offset + e.v + 1) << '\n';
      a_out << (offset + e.v + 1) << ", " << (offset + e.u + 1) << '\n';
    }
    gl_out << graph.label() << '\n';
    offset += graph.num_nodes();
  }
  if (!a_out || !ind_out || !gl_out) throw Error(ErrorKind::IoFailure, "write failed");
}

Matrix one_hot_features(const Graph& graph, std::size_t alphabet) {
  if (!graph.node_labels()) {
    throw Error(ErrorKind::NoNodeLabels, "graph " + std::to_string(graph.id()));
  }
  const auto& labels = *graph.node_labels();
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(graph.num_nodes()),
                          static_cast<Eigen::Index>(alphabet));
  for (std::size_t n = 0; n < labels.size(); ++n) {
    if (labels[n] < 0 || static_cast<std::size_t>(labels[n]) >= alphabet) {
      throw Error(ErrorKind::MalformedDataset, "node label " + std::to_string(labels[n]) +
                                                   " outside alphabet of size " +
                                                   std::to_string(alphabet));
    }
    x(static_cast<Eigen::Index>(n), labels[n]) = 1.0;
  }
  return x;
}

std::vector<Matrix> one_hot_features(const Dataset& dataset) {
  if (!dataset.has_node_labels()) throw Error(ErrorKind::NoNodeLabels, dataset.name);
  std::vector<Matrix> out;
  out.reserve(dataset.size());
  for (const auto& g : dataset.graphs) out.push_back(one_hot_features(g, dataset.node_label_alphabet));
  return out;
}

Matrix adjacency_matrix(const Graph& graph) {
  const auto n = static_cast<Eigen::Index>(graph.num_nodes());
  Matrix a = Matrix::Zero(n, n);
  for (const auto& e : graph.edges()) {
    a(e.u, e.v) = 1.0;
    a(e.v, e.u) = 1.0;
  }
  return a;
}

SparseMatrix block_diagonal(std::span<const Graph> graphs, const std::function<Matrix(const Graph&)>& block) {
  std::vector<Eigen::Triplet<double>> entries;
  Eigen::Index offset = 0;
  for (const auto& g : graphs) {
    const Matrix m = block(g);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (m(r, c) != 0.0) entries.emplace_back(offset + r, offset + c, m(r, c));
      }
    }
    offset += m.rows();
  }
  SparseMatrix out(offset, offset);
  out.setFromTriplets(entries.begin(), entries.end());
  return out;
}

Matrix normalized_adjacency(const Graph& graph) {
  const auto n = static_cast<Eigen::Index>(graph.num_nodes());
  Vector inv_sqrt(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    inv_sqrt[k] = 1.0 / std::sqrt(static_cast<double>(graph.degree(static_cast<NodeId>(k)) + 1));
  }
  Matrix a = Matrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) a(k, k) = inv_sqrt[k] * inv_sqrt[k];
  for (const auto& e : graph.edges()) {
    const double w = inv_sqrt[e.u] * inv_sqrt[e.v];
    a(e.u, e.v) = w;
    a(e.v, e.u) = w;
  }
  return a;
}

SplitPlan split_dataset(std::size_t num_graphs, const SplitRatios& ratios, std::uint64_t seed) {
  const double parts[] = {ratios.val, ratios.test, ratios.full, ratios.miss};
  double sum = 0.0;
  for (double r : parts) {
    if (!(r > 0.0)) throw Error(ErrorKind::InvalidArgument, "split ratios must be positive");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorKind::InvalidArgument, "split ratios must sum to 1");
  }

  // The epsilon keeps products such as 0.3 * 10 = 2.9999999999999996 at 3.
  const auto block = [&](double r) {
    return static_cast<std::size_t>(std::floor(r * static_cast<double>(num_graphs) + 1e-9));
  };
  const std::size_t n_val = block(ratios.val);
  const std::size_t n_test = block(ratios.test);
  const std::size_t n_full = block(ratios.full);
  if (n_val + n_test + n_full > num_graphs) {
    throw Error(ErrorKind::EmptyPartition, "ratios exceed dataset size");
  }

  std::vector<std::size_t> order(num_graphs);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  SplitPlan plan;
  plan.seed = seed;
  auto it = order.begin();
  const auto take = [&](std::size_t count, std::vector<std::size_t>& dest) {
    dest.assign(it, it + static_cast<std::ptrdiff_t>(count));
    it += static_cast<std::ptrdiff_t>(count);
    std::sort(dest.begin(), dest.end());
  };
  take(n_val, plan.val);
  take(n_test, plan.test);
  take(n_full, plan.full);
  take(num_graphs - n_val - n_test - n_full, plan.miss);

  if (plan.val.empty() || plan.test.empty() || plan.full.empty() || plan.miss.empty()) {
    throw Error(ErrorKind::EmptyPartition,
                "split of " + std::to_string(num_graphs) + " graphs leaves an empty set");
  }
  return plan;
}

SplitPlan split_dataset(const Dataset& dataset, const SplitRatios& ratios, std::uint64_t seed) {
  return split_dataset(dataset.size(), ratios, seed);
}

}  // namespace nodefeat
