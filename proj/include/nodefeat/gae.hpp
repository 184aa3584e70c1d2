#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "nodefeat/graph.hpp"
#include "nodefeat/matrix.hpp"
#include "nodefeat/nn/optim.hpp"
#include "nodefeat/nn/params.hpp"
#include "nodefeat/structural.hpp"

namespace nodefeat {

/// Graph autoencoder hyperparameters. Widths exclude the input width, which
/// is taken from the feature matrices; the decoder output width equals the
/// input width.
struct GaeConfig {
  std::vector<std::size_t> encoder_widths{64, 16};
  std::vector<std::size_t> decoder_hidden{64};
  double learning_rate = 1e-2;
  std::size_t epochs = 300;
};

/// GCN encoder (`gcn.<k>.weight`, no bias, relu on all but the last layer)
/// followed by an MLP decoder (`dec.<k>.weight`, `dec.<k>.bias`).
struct GaeModel {
  nn::ParamSet params;
  std::size_t input_dim = 0;
  std::size_t embedding_dim = 0;
  std::size_t encoder_layers = 0;

  /// Glorot weights (drawn in layer order, row-major) and zero biases.
  static GaeModel init(std::size_t input_dim, const GaeConfig& config, std::uint64_t seed);
};

struct GaeTrainResult {
  GaeModel model;
  /// Mean over graphs of the per-graph reconstruction MSE, one entry per
  /// epoch, measured before that epoch's update.
  std::vector<double> loss_history;
};

/// Graphs stacked into one block-diagonal problem.
struct GaeBatch {
  SparseMatrix adjacency;  // normalized adjacency per graph on the diagonal
  Matrix features;         // node rows of all graphs in order
  Vector row_weights;      // 1 / (G * N_i * F) on the rows of graph i
};

GaeBatch make_gae_batch(std::span<const Graph> graphs, std::span<const StructuralFeatureMatrix> features);

/// Mean over graphs of the per-graph reconstruction MSE. When `grad` is set,
/// the gradient with respect to `model.params` is added into it.
double gae_objective(const GaeModel& model, const GaeBatch& batch, nn::ParamSet* grad = nullptr);

/// Full-batch training on topology-derived features only: every epoch
/// averages the per-graph MSE gradients in graph order and takes one Adam
/// step. Throws DivergedTraining on a non-finite loss.
GaeTrainResult train_gae(std::span<const Graph> graphs,
                         std::span<const StructuralFeatureMatrix> features, const GaeConfig& config,
                         std::uint64_t seed);

/// Encoder output for one graph (N x P).
Matrix node_embeddings(const GaeModel& model, const Graph& graph, const Matrix& features);
Matrix node_embeddings(const GaeModel& model, const Matrix& a_norm, const Matrix& features);

/// Decoder(encoder(F)) for one graph.
Matrix reconstruct(const GaeModel& model, const Matrix& a_norm, const Matrix& features);

/// Column-wise mean of Z.
Vector graph_embedding(const Matrix& z);

struct EmbeddingSet {
  std::size_t dim = 0;
  std::vector<Matrix> nodes;
  std::vector<Vector> graphs;
};

EmbeddingSet embed_graphs(const GaeModel& model, std::span<const Graph> graphs,
                          std::span<const StructuralFeatureMatrix> features);

struct ProjectedPoint {
  double x = 0.0;
  double y = 0.0;
  int label = 0;
};

/// Top-2 principal components of the centered rows of `points`. Within
/// each component the entry of largest magnitude is made positive.
std::vector<ProjectedPoint> project_2d(const Matrix& points, std::span<const int> labels);

/// All node embedding rows stacked in graph order.
Matrix stack_node_embeddings(const EmbeddingSet& embeddings);

/// CSV `graph_id,node_id,z1..zP`.
void write_embeddings_csv(const EmbeddingSet& embeddings, const std::filesystem::path& path);

}  // namespace nodefeat
