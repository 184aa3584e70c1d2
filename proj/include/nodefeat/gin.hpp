#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nodefeat/graph.hpp"
#include "nodefeat/matrix.hpp"
#include "nodefeat/nn/params.hpp"

namespace nodefeat {

struct GinConfig {
  std::size_t layers = 2;
  std::size_t hidden = 64;
  /// Affine layers per node-update MLP.
  std::size_t mlp_depth = 2;
  double epsilon = 0.0;
  double learning_rate = 1e-2;
  std::size_t epochs = 100;
};

/// Graph Isomorphism Network: each layer maps H to
/// relu(MLP((1 + eps) H + A H)); mean readout; linear head to class logits.
/// Parameters: `gin<l>.<k>.weight|bias` per layer l, `head.0.weight|bias`.
struct GinModel {
  nn::ParamSet params;
  std::size_t input_dim = 0;
  std::size_t num_classes = 0;
  std::size_t layers = 0;
  double epsilon = 0.0;

  static GinModel init(std::size_t input_dim, std::size_t num_classes, const GinConfig& config,
                       std::uint64_t seed);
};

/// A graph with the node features used for it and its class.
struct GraphSample {
  const Graph* graph = nullptr;
  const Matrix* features = nullptr;
  int label = 0;
};

/// (1 + eps) I + A.
Matrix gin_aggregation_matrix(const Graph& graph, double epsilon);

/// One GIN layer with the MLP stored under `prefix`.
Matrix gin_layer_forward(const Matrix& aggregation, const Matrix& h, const nn::ParamSet& params,
                         std::string_view prefix);

/// Class logits (length num_classes).
Vector gin_forward(const Graph& graph, const Matrix& features, const GinModel& model);

struct GinTrainResult {
  GinModel model;          // snapshot with the best validation accuracy
  std::size_t best_epoch = 0;
  double best_val_accuracy = 0.0;
  std::vector<double> loss_history;  // mean training cross-entropy per epoch, before the update
};

/// Full-batch cross-entropy training with Adam. Validation accuracy is
/// measured after every update; the earliest best snapshot is returned.
GinTrainResult train_gin(std::span<const GraphSample> train, std::span<const GraphSample> val,
                         std::size_t num_classes, const GinConfig& config, std::uint64_t seed);

/// Index of the largest logit; ties go to the lowest index.
std::size_t predict_class(const Vector& logits);

/// Fraction of samples whose predicted class equals the label.
double evaluate_accuracy(const GinModel& model, std::span<const GraphSample> samples);

}  // namespace nodefeat
