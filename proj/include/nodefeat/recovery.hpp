#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "nodefeat/gae.hpp"
#include "nodefeat/graph.hpp"
#include "nodefeat/matrix.hpp"

namespace nodefeat {

struct Donor {
  std::size_t graph = 0;  // dataset index
  double distance = 0.0;
};

/// Up to `max_donors` graphs from `candidates` with the recipient's label,
/// closest in graph-embedding space (Euclidean), ties by ascending index.
/// When fewer exist the available ones are returned with a warning; with
/// none, all candidates are ranked regardless of label (warning) unless
/// `allow_label_fallback` is false, in which case NoDonorAvailable is thrown.
std::vector<Donor> nearest_graphs(std::size_t recipient, const EmbeddingSet& embeddings,
                                  std::span<const int> labels, std::span<const std::size_t> candidates,
                                  std::size_t max_donors, bool allow_label_fallback = true);

/// The min(count, N_j) rows of `donor` closest to `recipient.row(node)`,
/// ties by ascending index, in ascending distance order.
std::vector<std::size_t> nearest_nodes(std::size_t node, const Matrix& recipient, const Matrix& donor,
                                       std::size_t count);

/// Donor graphs and, per donor, the matched node set of every recipient node.
struct NeighborPlan {
  std::size_t recipient = 0;
  std::size_t max_donors = 0;
  std::size_t max_nodes = 0;
  std::vector<Donor> donors;
  /// node_sets[d][n] = matched nodes of donors[d] for recipient node n.
  std::vector<std::vector<std::vector<std::size_t>>> node_sets;
};

NeighborPlan build_neighbor_plan(std::size_t recipient, const EmbeddingSet& embeddings,
                                 std::span<const int> labels, std::span<const std::size_t> candidates,
                                 std::size_t max_donors, std::size_t max_nodes);

/// Row-stochastic averaging matrix: C(n, l) = 1/|S_n| for l in S_n.
struct TransferMatrix {
  std::size_t recipient = 0;
  std::size_t donor = 0;
  Matrix values;
};

TransferMatrix transfer_matrix(std::span<const std::vector<std::size_t>> node_sets,
                               std::size_t donor_nodes);
TransferMatrix transfer_matrix(const NeighborPlan& plan, std::size_t donor_slot,
                               std::size_t donor_nodes);

/// Average over the plan's donors of C X_donor. `features` is indexed by
/// dataset index and only donor entries are read.
Matrix lse_nn_estimate(const NeighborPlan& plan, std::span<const Matrix> features);

/// Average over donors of P X_donor where each row of P selects one donor
/// node uniformly at random (with replacement).
Matrix lse_ng_estimate(std::size_t recipient_nodes, std::span<const Donor> donors,
                       std::span<const Matrix> features, std::uint64_t seed);

enum class Baseline { Zeros, Ones, Random, Degree };

std::string_view to_string(Baseline kind);

/// Zeros / ones / iid Uniform[0,1] / one-hot of min(degree, F - 1).
Matrix baseline_features(Baseline kind, const Graph& graph, std::size_t num_features,
                         std::uint64_t seed);

/// ||X - X_hat||_F / ||X||_F.
double recovery_error(const Matrix& truth, const Matrix& estimate);

/// CSV `graph_id,node_id,x1..xF` for the listed dataset indices.
void write_features_csv(std::span<const std::size_t> indices, std::span<const Matrix> features,
                        const std::filesystem::path& path);

/// Plain-text dump of a plan: donors with distances and per-node matches.
void write_neighbor_plan(const NeighborPlan& plan, std::ostream& out);

}  // namespace nodefeat
