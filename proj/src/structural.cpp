#include "nodefeat/structural.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "nodefeat/error.hpp"

namespace nodefeat {

std::vector<std::size_t> triangle_counts(const Graph& graph) {
  const std::size_t n = graph.num_nodes();
  std::vector<std::size_t> tri(n, 0);
  // Each triangle u < v < w is found once from its lowest edge (u, v).
  for (const auto& e : graph.edges()) {
    const auto a = graph.neighbors(e.u);
    const auto b = graph.neighbors(e.v);
    auto ia = std::upper_bound(a.begin(), a.end(), e.v);
    auto ib = std::upper_bound(b.begin(), b.end(), e.v);
    while (ia != a.end() && ib != b.end()) {
      if (*ia < *ib) {
        ++ia;
      } else if (*ib < *ia) {
        ++ib;
      } else {
        ++tri[e.u];
        ++tri[e.v];
        ++tri[*ia];
        ++ia;
        ++ib;
      }
    }
  }
  return tri;
}

std::vector<double> clustering_coefficient(const Graph& graph) {
  const auto tri = triangle_counts(graph);
  std::vector<double> cc(graph.num_nodes(), 0.0);
  for (std::size_t k = 0; k < cc.size(); ++k) {
    const double d = static_cast<double>(graph.degree(static_cast<NodeId>(k)));
    if (d >= 2.0) cc[k] = 2.0 * static_cast<double>(tri[k]) / (d * (d - 1.0));
  }
  return cc;
}

EgonetCounts egonet_edge_counts(const Graph& graph, NodeId node) {
  if (node >= graph.num_nodes()) {
    throw Error(ErrorKind::IndexOutOfRange, "node " + std::to_string(node) + " of " +
                                                std::to_string(graph.num_nodes()));
  }
  const auto nb = graph.neighbors(node);
  const auto in_ego = [&](NodeId x) {
    return x == node || std::binary_search(nb.begin(), nb.end(), x);
  };
  EgonetCounts counts;
  counts.internal = nb.size();
  for (NodeId u : nb) {
    for (NodeId w : graph.neighbors(u)) {
      if (w == node) continue;
      if (in_ego(w)) {
        ++counts.internal;  // counted from both ends, halved below
      } else {
        ++counts.boundary;
      }
    }
  }
  // Neighbor-neighbor edges were seen twice; the spokes to `node` once.
  counts.internal = nb.size() + (counts.internal - nb.size()) / 2;
  return counts;
}

StructuralFeatureMatrix structural_feature_matrix(const Graph& graph, std::size_t graph_index) {
  const std::size_t n = graph.num_nodes();
  const auto tri = triangle_counts(graph);
  StructuralFeatureMatrix out;
  out.graph_index = graph_index;
  out.values = Matrix::Zero(static_cast<Eigen::Index>(n), kStructuralFeatureCount);

  for (std::size_t k = 0; k < n; ++k) {
    const auto node = static_cast<NodeId>(k);
    const auto row = static_cast<Eigen::Index>(k);
    const double d = static_cast<double>(graph.degree(node));
    auto set = [&](StructuralColumn c, double v) {
      out.values(row, static_cast<Eigen::Index>(c)) = v;
    };
    set(StructuralColumn::Degree, d);
    set(StructuralColumn::Triangles, static_cast<double>(tri[k]));
    if (d >= 2.0) set(StructuralColumn::Clustering, 2.0 * static_cast<double>(tri[k]) / (d * (d - 1.0)));

    const auto nb = graph.neighbors(node);
    if (!nb.empty()) {
      double sum = 0.0;
      double lo = std::numeric_limits<double>::infinity();
      double hi = 0.0;
      for (NodeId u : nb) {
        const double du = static_cast<double>(graph.degree(u));
        sum += du;
        lo = std::min(lo, du);
        hi = std::max(hi, du);
      }
      const double mean = sum / d;
      double var = 0.0;
      for (NodeId u : nb) {
        const double diff = static_cast<double>(graph.degree(u)) - mean;
        var += diff * diff;
      }
      set(StructuralColumn::NeighborDegreeMean, mean);
      set(StructuralColumn::NeighborDegreeMin, lo);
      set(StructuralColumn::NeighborDegreeMax, hi);
      set(StructuralColumn::NeighborDegreeStd, std::sqrt(var / d));
    }
    const auto ego = egonet_edge_counts(graph, node);
    set(StructuralColumn::EgonetInternalEdges, static_cast<double>(ego.internal));
    set(StructuralColumn::EgonetBoundaryEdges, static_cast<double>(ego.boundary));
  }
  return out;
}

std::vector<StructuralFeatureMatrix> structural_features(const Dataset& dataset) {
  std::vector<StructuralFeatureMatrix> out;
  out.reserve(dataset.size());
  for (std::size_t g = 0; g < dataset.size(); ++g) {
    out.push_back(structural_feature_matrix(dataset.graphs[g], g));
  }
  return out;
}

std::vector<StructuralFeatureMatrix> zscore_normalize(std::span<const StructuralFeatureMatrix> features) {
  std::size_t rows = 0;
  Eigen::Index cols = -1;
  for (const auto& f : features) {
    if (cols < 0) cols = f.values.cols();
    if (f.values.cols() != cols) throw Error(ErrorKind::ShapeMismatch, "column counts differ");
    rows += static_cast<std::size_t>(f.values.rows());
  }
  if (rows == 0) throw Error(ErrorKind::EmptyInput, "no nodes to normalize");

  const double count = static_cast<double>(rows);
  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(cols);
  for (const auto& f : features) mean += f.values.colwise().sum();
  mean /= count;
  Eigen::RowVectorXd var = Eigen::RowVectorXd::Zero(cols);
  for (const auto& f : features) {
    var += (f.values.rowwise() - mean).array().square().matrix().colwise().sum();
  }
  var /= count;

  std::vector<StructuralFeatureMatrix> out;
  out.reserve(features.size());
  for (const auto& f : features) {
    StructuralFeatureMatrix z{f.graph_index, Matrix(f.values.rows(), cols)};
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double sd = std::sqrt(var[c]);
      // Relative guard: round-off leaves a tiny variance on constant columns.
      if (sd <= 1e-12 * std::max(1.0, std::abs(mean[c]))) {
        z.values.col(c).setZero();
      } else {
        z.values.col(c) = (f.values.col(c).array() - mean[c]) / sd;
      }
    }
    out.push_back(std::move(z));
  }
  return out;
}

void write_structural_csv(std::span<const StructuralFeatureMatrix> features,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
  out << "graph_id,node_id";
  for (std::size_t c = 1; c <= kStructuralFeatureCount; ++c) out << ",f" << c;
  out << '\n' << std::setprecision(17);
  for (const auto& f : features) {
    for (Eigen::Index r = 0; r < f.values.rows(); ++r) {
      out << f.graph_index + 1 << ',' << r;
      for (Eigen::Index c = 0; c < f.values.cols(); ++c) out << ',' << f.values(r, c);
      out << '\n';
    }
  }
  if (!out) throw Error(ErrorKind::IoFailure, "write failed: " + path.string());
}

}  // namespace nodefeat
