#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nodefeat/matrix.hpp"

namespace nodefeat {

using NodeId = std::uint32_t;

/// Undirected edge stored with u < v.
struct Edge {
  NodeId u;
  NodeId v;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Simple undirected graph with a class label and optional integer node labels.
///
/// Construction validates the edge list: endpoints in range, no self-loops,
/// no duplicates. Edges are normalized to u < v and sorted; neighbor lists
/// are sorted ascending.
class Graph {
 public:
  Graph(std::size_t num_nodes, std::vector<Edge> edges, int label,
        std::optional<std::vector<int>> node_labels = std::nullopt, std::size_t id = 0);

  /// 1-based dataset-local id (0 when the graph is not part of a dataset).
  std::size_t id() const { return id_; }
  std::size_t num_nodes() const { return neighbors_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  int label() const { return label_; }
  const std::optional<std::vector<int>>& node_labels() const { return node_labels_; }

  std::span<const NodeId> neighbors(NodeId n) const { return neighbors_[n]; }
  std::size_t degree(NodeId n) const { return neighbors_[n].size(); }
  bool has_edge(NodeId a, NodeId b) const;

  /// Graph with node k of the result equal to node perm[k] of this graph.
  Graph permuted(std::span<const NodeId> perm) const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.id_ == b.id_ && a.label_ == b.label_ && a.edges_ == b.edges_ &&
           a.node_labels_ == b.node_labels_ && a.neighbors_.size() == b.neighbors_.size();
  }

 private:
  std::size_t id_;
  int label_;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> neighbors_;
  std::optional<std::vector<int>> node_labels_;
};

/// A graph-classification dataset. Node labels and graph labels are
/// contiguous 0-based codes; the raw values seen in the files are kept in
/// `node_label_values` / `class_values` (index = code).
struct Dataset {
  std::string name;
  std::vector<Graph> graphs;
  std::size_t node_label_alphabet = 0;
  std::vector<long long> node_label_values;
  std::vector<long long> class_values;

  std::size_t size() const { return graphs.size(); }
  std::size_t num_classes() const { return class_values.size(); }
  std::size_t total_nodes() const;
  bool has_node_labels() const { return node_label_alphabet > 0; }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Reads `<dir>/<name>_A.txt`, `_graph_indicator.txt`, `_graph_labels.txt`
/// and the optional `_node_labels.txt`.
///
/// Every undirected edge is stored once. An edge listed in only one
/// direction is accepted with a warning; self-loop lines are dropped with a
/// warning. Node labels and graph labels are remapped to 0-based codes in
/// ascending order of their raw values.
Dataset parse_tudataset(const std::filesystem::path& dir, const std::string& name);

/// Writes the dataset in the same format, listing both directions of every
/// edge and the 0-based label codes.
void write_tudataset(const Dataset& dataset, const std::filesystem::path& dir);

/// One-hot encoding of node labels: N_i x F with F = node_label_alphabet.
std::vector<Matrix> one_hot_features(const Dataset& dataset);
Matrix one_hot_features(const Graph& graph, std::size_t alphabet);

/// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I.
Matrix normalized_adjacency(const Graph& graph);

/// Dense 0/1 adjacency matrix without self-loops.
Matrix adjacency_matrix(const Graph& graph);

/// Block-diagonal stack of `block(graph)` over `graphs`, keeping nonzeros.
SparseMatrix block_diagonal(std::span<const Graph> graphs, const std::function<Matrix(const Graph&)>& block);

struct SplitRatios {
  double val = 0.1;
  double test = 0.1;
  double full = 0.3;
  double miss = 0.5;
};

/// Partition of dataset indices (0-based positions in Dataset::graphs; the
/// matching graph id is index + 1). Each list is sorted ascending.
struct SplitPlan {
  std::uint64_t seed = 0;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
  std::vector<std::size_t> full;
  std::vector<std::size_t> miss;
};

/// Seeded uniform permutation of 0..T-1, cut into consecutive blocks of
/// floor(ratio * T) for val, test and full; the remainder is the miss set.
SplitPlan split_dataset(std::size_t num_graphs, const SplitRatios& ratios, std::uint64_t seed);
SplitPlan split_dataset(const Dataset& dataset, const SplitRatios& ratios, std::uint64_t seed);

}  // namespace nodefeat
