#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "nodefeat/graph.hpp"
#include "nodefeat/matrix.hpp"

namespace nodefeat {

/// Column order of the structural feature matrix.
enum class StructuralColumn : std::size_t {
  Degree = 0,
  Clustering,
  Triangles,
  NeighborDegreeMean,
  NeighborDegreeMin,
  NeighborDegreeMax,
  NeighborDegreeStd,
  EgonetInternalEdges,
  EgonetBoundaryEdges,
};

inline constexpr std::size_t kStructuralFeatureCount = 9;

inline constexpr std::array<std::string_view, kStructuralFeatureCount> kStructuralFeatureNames = {
    "degree",          "clustering",      "triangles",
    "nbr_deg_mean",    "nbr_deg_min",     "nbr_deg_max",
    "nbr_deg_std",     "ego_internal",    "ego_boundary",
};

/// Per-node topology features of one graph (N x 9, columns as above).
struct StructuralFeatureMatrix {
  std::size_t graph_index = 0;
  Matrix values;
};

/// Number of triangles through each node.
std::vector<std::size_t> triangle_counts(const Graph& graph);

/// 2 tri(n) / (deg(n) (deg(n) - 1)) for degree >= 2, else 0.
std::vector<double> clustering_coefficient(const Graph& graph);

struct EgonetCounts {
  std::size_t internal = 0;
  std::size_t boundary = 0;
  friend bool operator==(const EgonetCounts&, const EgonetCounts&) = default;
};

/// Edge counts for the egonet {node} + neighbors: edges with both endpoints
/// inside, and edges with exactly one endpoint inside.
EgonetCounts egonet_edge_counts(const Graph& graph, NodeId node);

StructuralFeatureMatrix structural_feature_matrix(const Graph& graph, std::size_t graph_index = 0);

std::vector<StructuralFeatureMatrix> structural_features(const Dataset& dataset);

/// Column-wise z-score over all rows of all matrices (population std);
/// zero-variance columns become 0.
std::vector<StructuralFeatureMatrix> zscore_normalize(std::span<const StructuralFeatureMatrix> features);

/// CSV with header `graph_id,node_id,f1..f9`; graph_id = graph_index + 1.
void write_structural_csv(std::span<const StructuralFeatureMatrix> features,
                          const std::filesystem::path& path);

}  // namespace nodefeat
