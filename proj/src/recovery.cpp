#include "nodefeat/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "nodefeat/error.hpp"
#include "nodefeat/log.hpp"
#include "nodefeat/rng.hpp"

namespace nodefeat {

namespace {

struct Ranked {
  double sq_distance;
  std::size_t index;
  bool operator<(const Ranked& o) const {
    return sq_distance < o.sq_distance || (sq_distance == o.sq_distance && index < o.index);
  }
};

std::vector<Ranked> closest(std::vector<Ranked> ranked, std::size_t count) {
  count = std::min(count, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(count), ranked.end());
  ranked.resize(count);
  return ranked;
}

}  // namespace

std::vector<Donor> nearest_graphs(std::size_t recipient, const EmbeddingSet& embeddings,
                                  std::span<const int> labels, std::span<const std::size_t> candidates,
                                  std::size_t max_donors, bool allow_label_fallback) {
  if (recipient >= embeddings.graphs.size() || labels.size() != embeddings.graphs.size()) {
    throw Error(ErrorKind::IndexOutOfRange, "recipient or label table out of range");
  }
  if (max_donors == 0) throw Error(ErrorKind::InvalidArgument, "max_donors must be >= 1");
  const Vector& z = embeddings.graphs[recipient];

  const auto rank = [&](bool same_label_only) {
    std::vector<Ranked> ranked;
    for (std::size_t j : candidates) {
      if (j == recipient) continue;
      if (j >= embeddings.graphs.size()) throw Error(ErrorKind::IndexOutOfRange, "candidate graph index");
      if (same_label_only && labels[j] != labels[recipient]) continue;
      ranked.push_back({(embeddings.graphs[j] - z).squaredNorm(), j});
    }
    return ranked;
  };

  auto ranked = rank(true);
  if (ranked.empty()) {
    if (!allow_label_fallback) {
      throw Error(ErrorKind::NoDonorAvailable,
                  "no donor with label " + std::to_string(labels[recipient]) + " for graph " +
                      std::to_string(recipient + 1));
    }
    log::warn("graph " + std::to_string(recipient + 1) +
              ": no same-label donor; ranking donors of any label");
    ranked = rank(false);
    if (ranked.empty()) {
      throw Error(ErrorKind::NoDonorAvailable, "no donor graphs for graph " + std::to_string(recipient + 1));
    }
  } else if (ranked.size() < max_donors) {
    log::warn("graph " + std::to_string(recipient + 1) + ": only " + std::to_string(ranked.size()) +
              " same-label donor(s) for " + std::to_string(max_donors) + " requested");
  }

  std::vector<Donor> out;
  for (const auto& r : closest(std::move(ranked), max_donors)) {
    out.push_back({r.index, std::sqrt(r.sq_distance)});
  }
  return out;
}

std::vector<std::size_t> nearest_nodes(std::size_t node, const Matrix& recipient, const Matrix& donor,
                                       std::size_t count) {
  if (node >= static_cast<std::size_t>(recipient.rows())) {
    throw Error(ErrorKind::IndexOutOfRange, "node " + std::to_string(node));
  }
  if (recipient.cols() != donor.cols()) throw Error(ErrorKind::ShapeMismatch, "embedding widths differ");
  std::vector<Ranked> ranked(static_cast<std::size_t>(donor.rows()));
  const auto row = recipient.row(static_cast<Eigen::Index>(node));
  for (Eigen::Index l = 0; l < donor.rows(); ++l) {
    ranked[static_cast<std::size_t>(l)] = {(donor.row(l) - row).squaredNorm(), static_cast<std::size_t>(l)};
  }
  std::vector<std::size_t> out;
  for (const auto& r : closest(std::move(ranked), count)) out.push_back(r.index);
  return out;
}

NeighborPlan build_neighbor_plan(std::size_t recipient, const EmbeddingSet& embeddings,
                                 std::span<const int> labels, std::span<const std::size_t> candidates,
                                 std::size_t max_donors, std::size_t max_nodes) {
  if (max_nodes == 0) throw Error(ErrorKind::InvalidArgument, "max_nodes must be >= 1");
  NeighborPlan plan;
  plan.recipient = recipient;
  plan.max_donors = max_donors;
  plan.max_nodes = max_nodes;
  plan.donors = nearest_graphs(recipient, embeddings, labels, candidates, max_donors);
  const Matrix& zi = embeddings.nodes[recipient];
  for (const auto& d : plan.donors) {
    const Matrix& zj = embeddings.nodes[d.graph];
    std::vector<std::vector<std::size_t>> sets(static_cast<std::size_t>(zi.rows()));
    for (std::size_t n = 0; n < sets.size(); ++n) sets[n] = nearest_nodes(n, zi, zj, max_nodes);
    plan.node_sets.push_back(std::move(sets));
  }
  return plan;
}

TransferMatrix transfer_matrix(std::span<const std::vector<std::size_t>> node_sets,
                               std::size_t donor_nodes) {
  TransferMatrix c;
  c.values = Matrix::Zero(static_cast<Eigen::Index>(node_sets.size()), static_cast<Eigen::Index>(donor_nodes));
  for (std::size_t n = 0; n < node_sets.size(); ++n) {
    const auto& set = node_sets[n];
    if (set.empty()) throw Error(ErrorKind::EmptyNeighborSet, "recipient node " + std::to_string(n));
    const double w = 1.0 / static_cast<double>(set.size());
    for (std::size_t l : set) {
      if (l >= donor_nodes) throw Error(ErrorKind::IndexOutOfRange, "donor node " + std::to_string(l));
      c.values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(l)) = w;
    }
  }
  return c;
}

TransferMatrix transfer_matrix(const NeighborPlan& plan, std::size_t donor_slot, std::size_t donor_nodes) {
  if (donor_slot >= plan.donors.size()) throw Error(ErrorKind::IndexOutOfRange, "donor slot");
  TransferMatrix c = transfer_matrix(plan.node_sets[donor_slot], donor_nodes);
  c.recipient = plan.recipient;
  c.donor = plan.donors[donor_slot].graph;
  return c;
}

Matrix lse_nn_estimate(const NeighborPlan& plan, std::span<const Matrix> features) {
  if (plan.donors.empty()) throw Error(ErrorKind::NoDonorAvailable, "empty neighbor plan");
  Matrix estimate;
  for (std::size_t d = 0; d < plan.donors.size(); ++d) {
    const Matrix& x = features[plan.donors[d].graph];
    const TransferMatrix c = transfer_matrix(plan, d, static_cast<std::size_t>(x.rows()));
    if (d == 0) {
      estimate = c.values * x;
    } else {
      estimate.noalias() += c.values * x;
    }
  }
  return estimate / static_cast<double>(plan.donors.size());
}

Matrix lse_ng_estimate(std::size_t recipient_nodes, std::span<const Donor> donors,
                       std::span<const Matrix> features, std::uint64_t seed) {
  if (donors.empty()) throw Error(ErrorKind::NoDonorAvailable, "no donors for random transfer");
  Rng rng(seed);
  Matrix estimate;
  for (const auto& d : donors) {
    const Matrix& x = features[d.graph];
    if (x.rows() == 0) throw Error(ErrorKind::EmptyMatrix, "donor graph without nodes");
    if (estimate.size() == 0) estimate = Matrix::Zero(static_cast<Eigen::Index>(recipient_nodes), x.cols());
    for (std::size_t n = 0; n < recipient_nodes; ++n) {
      const auto pick = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(x.rows())));
      estimate.row(static_cast<Eigen::Index>(n)) += x.row(pick);
    }
  }
  return estimate / static_cast<double>(donors.size());
}

std::string_view to_string(Baseline kind) {
  switch (kind) {
    case Baseline::Zeros: return "zeros";
    case Baseline::Ones: return "ones";
    case Baseline::Random: return "random";
    case Baseline::Degree: return "degree";
  }
  return "unknown";
}

Matrix baseline_features(Baseline kind, const Graph& graph, std::size_t num_features, std::uint64_t seed) {
  if (num_features == 0) throw Error(ErrorKind::InvalidArgument, "baseline features need F >= 1");
  const auto n = static_cast<Eigen::Index>(graph.num_nodes());
  const auto f = static_cast<Eigen::Index>(num_features);
  switch (kind) {
    case Baseline::Zeros:
      return Matrix::Zero(n, f);
    case Baseline::Ones:
      return Matrix::Ones(n, f);
    case Baseline::Random: {
      Rng rng(seed);
      Matrix x(n, f);
      for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < f; ++c) x(r, c) = rng.uniform();
      }
      return x;
    }
    case Baseline::Degree: {
      Matrix x = Matrix::Zero(n, f);
      for (Eigen::Index r = 0; r < n; ++r) {
        const auto d = static_cast<Eigen::Index>(graph.degree(static_cast<NodeId>(r)));
        x(r, std::min(d, f - 1)) = 1.0;
      }
      return x;
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown baseline");
}

double recovery_error(const Matrix& truth, const Matrix& estimate) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "recovery_error: shapes differ");
  }
  const double reference = truth.norm();
  if (!(reference > 0.0)) throw Error(ErrorKind::ZeroReference, "true features have zero norm");
  return (truth - estimate).norm() / reference;
}

void write_features_csv(std::span<const std::size_t> indices, std::span<const Matrix> features,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
  const Eigen::Index width = indices.empty() ? 0 : features[indices.front()].cols();
  out << "graph_id,node_id";
  for (Eigen::Index c = 1; c <= width; ++c) out << ",x" << c;
  out << '\n' << std::setprecision(17);
  for (std::size_t g : indices) {
    const Matrix& x = features[g];
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      out << g + 1 << ',' << r;
      for (Eigen::Index c = 0; c < x.cols(); ++c) out << ',' << x(r, c);
      out << '\n';
    }
  }
  if (!out) throw Error(ErrorKind::IoFailure, "write failed: " + path.string());
}

void write_neighbor_plan(const NeighborPlan& plan, std::ostream& out) {
  out << "recipient " << plan.recipient + 1 << " qbar " << plan.max_donors << " nbar " << plan.max_nodes
      << '\n';
  for (std::size_t d = 0; d < plan.donors.size(); ++d) {
    out << "donor " << plan.donors[d].graph + 1 << " distance " << std::setprecision(17)
        << plan.donors[d].distance << '\n';
    for (std::size_t n = 0; n < plan.node_sets[d].size(); ++n) {
      out << "  node " << n << ':';
      for (std::size_t l : plan.node_sets[d][n]) out << ' ' << l;
      out << '\n';
    }
  }
}

}  // namespace nodefeat
