#include "nodefeat/gin.hpp"

#include <cmath>
#include <string>

#include "nodefeat/error.hpp"
#include "nodefeat/nn/layers.hpp"
#include "nodefeat/nn/optim.hpp"
#include "nodefeat/nn/tape.hpp"

namespace nodefeat {

namespace {

constexpr const char* kHead = "head";

std::string layer_prefix(std::size_t l) { return "gin" + std::to_string(l); }

void check_features(const GinModel& model, const Graph& graph, const Matrix& x) {
  if (static_cast<std::size_t>(x.cols()) != model.input_dim ||
      x.rows() != static_cast<Eigen::Index>(graph.num_nodes())) {
    throw Error(ErrorKind::ShapeMismatch, "GIN input " + std::to_string(x.rows()) + "x" +
                                              std::to_string(x.cols()) + " for a graph of " +
                                              std::to_string(graph.num_nodes()) + " nodes, width " +
                                              std::to_string(model.input_dim));
  }
}

/// Samples stacked block-diagonally; `pooling` averages each graph's rows.
struct Batch {
  SparseMatrix aggregation;
  SparseMatrix pooling;
  Matrix features;
  std::vector<int> labels;
};

Batch make_batch(std::span<const GraphSample> samples, const GinModel& model) {
  std::vector<Graph> graphs;
  graphs.reserve(samples.size());
  Eigen::Index rows = 0;
  for (const auto& s : samples) {
    check_features(model, *s.graph, *s.features);
    if (s.label < 0 || static_cast<std::size_t>(s.label) >= model.num_classes) {
      throw Error(ErrorKind::InvalidArgument, "label " + std::to_string(s.label) + " out of range");
    }
    if (s.graph->num_nodes() == 0) throw Error(ErrorKind::EmptyMatrix, "graph without nodes");
    graphs.push_back(*s.graph);
    rows += static_cast<Eigen::Index>(s.graph->num_nodes());
  }
  Batch b;
  b.aggregation = block_diagonal(graphs, [&](const Graph& g) { return gin_aggregation_matrix(g, model.epsilon); });
  b.features.resize(rows, static_cast<Eigen::Index>(model.input_dim));
  std::vector<Eigen::Triplet<double>> pool;
  pool.reserve(static_cast<std::size_t>(rows));
  Eigen::Index offset = 0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const Eigen::Index n = samples[k].features->rows();
    b.features.middleRows(offset, n) = *samples[k].features;
    for (Eigen::Index r = 0; r < n; ++r) {
      pool.emplace_back(static_cast<Eigen::Index>(k), offset + r, 1.0 / static_cast<double>(n));
    }
    b.labels.push_back(samples[k].label);
    offset += n;
  }
  b.pooling.resize(static_cast<Eigen::Index>(samples.size()), rows);
  b.pooling.setFromTriplets(pool.begin(), pool.end());
  return b;
}

/// Logits (G x C) on a tape.
nn::Var forward(nn::Tape& tape, const nn::BoundParams& bound, const GinModel& model, const Batch& b) {
  nn::Var h = tape.constant_ref(b.features);
  for (std::size_t l = 0; l < model.layers; ++l) {
    h = tape.relu(nn::mlp(tape, tape.sparse_matmul(b.aggregation, h), bound, layer_prefix(l)));
  }
  return nn::mlp(tape, tape.sparse_matmul(b.pooling, h), bound, kHead);
}

Matrix logits_of(const GinModel& model, const Batch& b) {
  Matrix h = b.features;
  for (std::size_t l = 0; l < model.layers; ++l) {
    h = nn::mlp_forward(b.aggregation * h, model.params, layer_prefix(l)).cwiseMax(0.0);
  }
  return nn::mlp_forward(b.pooling * h, model.params, kHead);
}

double accuracy(const GinModel& model, const Batch& b) {
  const Matrix logits = logits_of(model, b);
  std::size_t correct = 0;
  for (Eigen::Index k = 0; k < logits.rows(); ++k) {
    if (predict_class(logits.row(k).transpose()) == static_cast<std::size_t>(b.labels[static_cast<std::size_t>(k)])) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

}  // namespace

GinModel GinModel::init(std::size_t input_dim, std::size_t num_classes, const GinConfig& config,
                        std::uint64_t seed) {
  if (input_dim == 0 || num_classes == 0 || config.layers == 0 || config.hidden == 0 ||
      config.mlp_depth == 0 || !std::isfinite(config.epsilon)) {
    throw Error(ErrorKind::InvalidArgument, "invalid GIN configuration");
  }
  GinModel model;
  model.input_dim = input_dim;
  model.num_classes = num_classes;
  model.layers = config.layers;
  model.epsilon = config.epsilon;
  Rng rng(seed);
  std::size_t width = input_dim;
  for (std::size_t l = 0; l < config.layers; ++l) {
    std::vector<std::size_t> widths{width};
    widths.insert(widths.end(), config.mlp_depth, config.hidden);
    nn::add_mlp_params(model.params, layer_prefix(l), widths, rng);
    width = config.hidden;
  }
  const std::size_t head[] = {width, num_classes};
  nn::add_mlp_params(model.params, kHead, head, rng);
  return model;
}

Matrix gin_aggregation_matrix(const Graph& graph, double epsilon) {
  Matrix m = adjacency_matrix(graph);
  m.diagonal().array() += 1.0 + epsilon;
  return m;
}

Matrix gin_layer_forward(const Matrix& aggregation, const Matrix& h, const nn::ParamSet& params,
                         std::string_view prefix) {
  if (aggregation.cols() != h.rows()) throw Error(ErrorKind::ShapeMismatch, "GIN aggregation size");
  return nn::mlp_forward(aggregation * h, params, prefix).cwiseMax(0.0);
}

Vector gin_forward(const Graph& graph, const Matrix& features, const GinModel& model) {
  check_features(model, graph, features);
  const Matrix agg = gin_aggregation_matrix(graph, model.epsilon);
  Matrix h = features;
  for (std::size_t l = 0; l < model.layers; ++l) h = gin_layer_forward(agg, h, model.params, layer_prefix(l));
  const Matrix pooled = h.colwise().mean();
  return nn::mlp_forward(pooled, model.params, kHead).row(0).transpose();
}

GinTrainResult train_gin(std::span<const GraphSample> train, std::span<const GraphSample> val,
                         std::size_t num_classes, const GinConfig& config, std::uint64_t seed) {
  if (train.empty() || val.empty()) throw Error(ErrorKind::EmptyInput, "GIN needs training and validation graphs");
  if (config.epochs == 0 || !(config.learning_rate > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "GIN needs epochs > 0 and a positive learning rate");
  }
  const auto input_dim = static_cast<std::size_t>(train.front().features->cols());
  GinModel model = GinModel::init(input_dim, num_classes, config, seed);
  const Batch train_set = make_batch(train, model);
  const Batch val_set = make_batch(val, model);

  nn::AdamState adam = nn::AdamState::init(model.params, {config.learning_rate});

  GinTrainResult result{model, 0, -1.0, {}};
  result.loss_history.reserve(config.epochs);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    nn::ParamSet grads = model.params.zeros_like();
    nn::Tape tape;
    const nn::BoundParams bound(tape, model.params);
    const nn::Var loss = tape.softmax_cross_entropy(forward(tape, bound, model, train_set), train_set.labels);
    const double epoch_loss = tape.scalar(loss);
    tape.backward(loss);
    bound.accumulate_gradients(tape, grads);
    if (!std::isfinite(epoch_loss) || !grads.all_finite()) {
      throw Error(ErrorKind::DivergedTraining, "GIN loss became non-finite at epoch " + std::to_string(epoch));
    }
    result.loss_history.push_back(epoch_loss);
    nn::adam_step(model.params, grads, adam);

    const double val_acc = accuracy(model, val_set);
    if (val_acc > result.best_val_accuracy) {
      result.best_val_accuracy = val_acc;
      result.best_epoch = epoch;
      result.model = model;
    }
  }
  return result;
}

std::size_t predict_class(const Vector& logits) {
  if (logits.size() == 0) throw Error(ErrorKind::EmptyMatrix, "no logits");
  std::size_t best = 0;
  for (Eigen::Index k = 1; k < logits.size(); ++k) {
    if (logits[k] > logits[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(k);
  }
  return best;
}

double evaluate_accuracy(const GinModel& model, std::span<const GraphSample> samples) {
  if (samples.empty()) throw Error(ErrorKind::EmptyTestSet, "no test graphs");
  return accuracy(model, make_batch(samples, model));
}

}  // namespace nodefeat
