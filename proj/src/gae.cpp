#include "nodefeat/gae.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "nodefeat/error.hpp"
#include "nodefeat/nn/layers.hpp"
#include "nodefeat/nn/tape.hpp"
#include "nodefeat/rng.hpp"

namespace nodefeat {

namespace {

constexpr const char* kEncoder = "gcn";
constexpr const char* kDecoder = "dec";

void check_input(const GaeModel& model, const Matrix& a_norm, const Matrix& features) {
  if (static_cast<std::size_t>(features.cols()) != model.input_dim) {
    throw Error(ErrorKind::ShapeMismatch, "feature width " + std::to_string(features.cols()) +
                                              " != encoder input " + std::to_string(model.input_dim));
  }
  if (a_norm.rows() != features.rows()) {
    throw Error(ErrorKind::ShapeMismatch, "adjacency and feature row counts differ");
  }
}

}  // namespace

GaeModel GaeModel::init(std::size_t input_dim, const GaeConfig& config, std::uint64_t seed) {
  if (input_dim == 0 || config.encoder_widths.empty()) {
    throw Error(ErrorKind::InvalidArgument, "GAE needs an input width and at least one encoder layer");
  }
  GaeModel model;
  model.input_dim = input_dim;
  model.encoder_layers = config.encoder_widths.size();
  model.embedding_dim = config.encoder_widths.back();
  Rng rng(seed);
  std::size_t width = input_dim;
  for (std::size_t k = 0; k < config.encoder_widths.size(); ++k) {
    model.params.add(nn::layer_name(kEncoder, k, "weight"),
                     nn::glorot_uniform(width, config.encoder_widths[k], rng));
    width = config.encoder_widths[k];
  }
  std::vector<std::size_t> dec{model.embedding_dim};
  dec.insert(dec.end(), config.decoder_hidden.begin(), config.decoder_hidden.end());
  dec.push_back(input_dim);
  nn::add_mlp_params(model.params, kDecoder, dec, rng);
  return model;
}

GaeBatch make_gae_batch(std::span<const Graph> graphs, std::span<const StructuralFeatureMatrix> features) {
  if (graphs.empty() || graphs.size() != features.size()) {
    throw Error(ErrorKind::InvalidArgument, "a GAE batch needs one feature matrix per graph");
  }
  const Eigen::Index width = features.front().values.cols();
  Eigen::Index rows = 0;
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    if (features[g].values.rows() != static_cast<Eigen::Index>(graphs[g].num_nodes()) ||
        features[g].values.cols() != width) {
      throw Error(ErrorKind::ShapeMismatch, "feature matrix " + std::to_string(g) + " has wrong shape");
    }
    if (graphs[g].num_nodes() == 0) throw Error(ErrorKind::EmptyMatrix, "graph without nodes");
    rows += features[g].values.rows();
  }

  GaeBatch batch;
  batch.adjacency = block_diagonal(graphs, [](const Graph& g) { return normalized_adjacency(g); });
  batch.features.resize(rows, width);
  batch.row_weights.resize(rows);
  const double per_graph = 1.0 / static_cast<double>(graphs.size());
  Eigen::Index offset = 0;
  for (const auto& f : features) {
    const Eigen::Index n = f.values.rows();
    batch.features.middleRows(offset, n) = f.values;
    // Each graph contributes the mean of its own squared errors.
    batch.row_weights.segment(offset, n).setConstant(per_graph / static_cast<double>(n * width));
    offset += n;
  }
  return batch;
}

double gae_objective(const GaeModel& model, const GaeBatch& batch, nn::ParamSet* grad) {
  if (static_cast<std::size_t>(batch.features.cols()) != model.input_dim) {
    throw Error(ErrorKind::ShapeMismatch, "feature width " + std::to_string(batch.features.cols()) +
                                              " != encoder input " + std::to_string(model.input_dim));
  }
  nn::Tape tape;
  const nn::BoundParams bound(tape, model.params);
  nn::Var h = tape.constant_ref(batch.features);
  for (std::size_t k = 0; k < model.encoder_layers; ++k) {
    h = tape.sparse_matmul(batch.adjacency, tape.matmul(h, bound[nn::layer_name(kEncoder, k, "weight")]));
    if (k + 1 < model.encoder_layers) h = tape.relu(h);
  }
  const nn::Var loss = tape.weighted_sse(nn::mlp(tape, h, bound, kDecoder), batch.features, batch.row_weights);
  if (grad) {
    tape.backward(loss);
    bound.accumulate_gradients(tape, *grad);
  }
  return tape.scalar(loss);
}

GaeTrainResult train_gae(std::span<const Graph> graphs,
                         std::span<const StructuralFeatureMatrix> features, const GaeConfig& config,
                         std::uint64_t seed) {
  if (graphs.empty() || graphs.size() != features.size()) {
    throw Error(ErrorKind::InvalidArgument, "train_gae needs one feature matrix per graph");
  }
  if (config.epochs == 0 || !(config.learning_rate > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "train_gae needs epochs > 0 and a positive learning rate");
  }
  const GaeBatch batch = make_gae_batch(graphs, features);
  const auto input_dim = static_cast<std::size_t>(batch.features.cols());

  GaeTrainResult result{GaeModel::init(input_dim, config, seed), {}};
  GaeModel& model = result.model;
  nn::AdamState adam = nn::AdamState::init(model.params, {config.learning_rate});
  result.loss_history.reserve(config.epochs);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    nn::ParamSet grads = model.params.zeros_like();
    const double epoch_loss = gae_objective(model, batch, &grads);
    if (!std::isfinite(epoch_loss) || !grads.all_finite()) {
      throw Error(ErrorKind::DivergedTraining, "GAE loss became non-finite at epoch " + std::to_string(epoch));
    }
    result.loss_history.push_back(epoch_loss);
    nn::adam_step(model.params, grads, adam);
  }
  return result;
}

Matrix node_embeddings(const GaeModel& model, const Matrix& a_norm, const Matrix& features) {
  check_input(model, a_norm, features);
  Matrix h = features;
  for (std::size_t k = 0; k < model.encoder_layers; ++k) {
    const auto act = (k + 1 < model.encoder_layers) ? nn::Activation::Relu : nn::Activation::Identity;
    h = nn::gcn_layer_forward(a_norm, h, model.params.at(nn::layer_name(kEncoder, k, "weight")), act);
  }
  return h;
}

Matrix node_embeddings(const GaeModel& model, const Graph& graph, const Matrix& features) {
  return node_embeddings(model, normalized_adjacency(graph), features);
}

Matrix reconstruct(const GaeModel& model, const Matrix& a_norm, const Matrix& features) {
  return nn::mlp_forward(node_embeddings(model, a_norm, features), model.params, kDecoder);
}

Vector graph_embedding(const Matrix& z) {
  if (z.rows() == 0) throw Error(ErrorKind::EmptyMatrix, "graph embedding of a graph with no nodes");
  return z.colwise().mean().transpose();
}

EmbeddingSet embed_graphs(const GaeModel& model, std::span<const Graph> graphs,
                          std::span<const StructuralFeatureMatrix> features) {
  if (graphs.size() != features.size()) {
    throw Error(ErrorKind::InvalidArgument, "embed_graphs needs one feature matrix per graph");
  }
  EmbeddingSet out;
  out.dim = model.embedding_dim;
  out.nodes.reserve(graphs.size());
  out.graphs.reserve(graphs.size());
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    out.nodes.push_back(node_embeddings(model, graphs[g], features[g].values));
    out.graphs.push_back(graph_embedding(out.nodes.back()));
  }
  return out;
}

std::vector<ProjectedPoint> project_2d(const Matrix& points, std::span<const int> labels) {
  if (points.rows() < 2 || points.cols() < 2) {
    throw Error(ErrorKind::InvalidArgument, "projection needs at least 2 points of dimension >= 2");
  }
  if (static_cast<std::size_t>(points.rows()) != labels.size()) {
    throw Error(ErrorKind::ShapeMismatch, "one label per point required");
  }
  const Eigen::RowVectorXd mean = points.colwise().mean();
  const Matrix centered = points.rowwise() - mean;
  const Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(points.rows());
  if (cov.cwiseAbs().maxCoeff() == 0.0) {
    throw Error(ErrorKind::DegenerateCloud, "all points are identical");
  }

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  const Eigen::VectorXd& values = solver.eigenvalues();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values[a] > values[b]; });

  Eigen::MatrixXd basis(points.cols(), 2);
  for (int c = 0; c < 2; ++c) {
    Eigen::VectorXd v = solver.eigenvectors().col(order[static_cast<std::size_t>(c)]);
    Eigen::Index arg = 0;
    for (Eigen::Index k = 1; k < v.size(); ++k) {
      if (std::abs(v[k]) > std::abs(v[arg])) arg = k;
    }
    if (v[arg] < 0.0) v = -v;
    basis.col(c) = v;
  }

  const Eigen::MatrixXd coords = centered * basis;
  std::vector<ProjectedPoint> out(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    out[static_cast<std::size_t>(r)] = {coords(r, 0), coords(r, 1), labels[static_cast<std::size_t>(r)]};
  }
  return out;
}

Matrix stack_node_embeddings(const EmbeddingSet& embeddings) {
  Eigen::Index rows = 0;
  for (const auto& z : embeddings.nodes) rows += z.rows();
  Matrix out(rows, static_cast<Eigen::Index>(embeddings.dim));
  Eigen::Index at = 0;
  for (const auto& z : embeddings.nodes) {
    out.middleRows(at, z.rows()) = z;
    at += z.rows();
  }
  return out;
}

void write_embeddings_csv(const EmbeddingSet& embeddings, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
  out << "graph_id,node_id";
  for (std::size_t p = 1; p <= embeddings.dim; ++p) out << ",z" << p;
  out << '\n' << std::setprecision(17);
  for (std::size_t g = 0; g < embeddings.nodes.size(); ++g) {
    const Matrix& z = embeddings.nodes[g];
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      out << g + 1 << ',' << r;
      for (Eigen::Index c = 0; c < z.cols(); ++c) out << ',' << z(r, c);
      out << '\n';
    }
  }
  if (!out) throw Error(ErrorKind::IoFailure, "write failed: " + path.string());
}

}  // namespace nodefeat
