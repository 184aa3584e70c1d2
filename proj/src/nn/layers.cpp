#include "nodefeat/nn/layers.hpp"

#include <cmath>
#include <string>

#include "nodefeat/error.hpp"

namespace nodefeat::nn {

std::string layer_name(std::string_view prefix, std::size_t layer, std::string_view what) {
  std::string name(prefix);
  name += '.';
  name += std::to_string(layer);
  name += '.';
  name += what;
  return name;
}

Matrix gcn_layer_forward(const Matrix& a_norm, const Matrix& h, const Matrix& w, Activation act) {
  if (a_norm.rows() != a_norm.cols() || a_norm.cols() != h.rows() || h.cols() != w.rows()) {
    throw Error(ErrorKind::ShapeMismatch, "gcn layer: A " + std::to_string(a_norm.rows()) + "x" +
                                              std::to_string(a_norm.cols()) + ", H " +
                                              std::to_string(h.rows()) + "x" + std::to_string(h.cols()) +
                                              ", W " + std::to_string(w.rows()) + "x" +
                                              std::to_string(w.cols()));
  }
  Matrix out = a_norm * (h * w);
  if (act == Activation::Relu) out = out.cwiseMax(0.0);
  return out;
}

Var gcn_layer(Tape& tape, Var a_norm, Var h, Var w, Activation act) {
  if (tape.value(a_norm).rows() != tape.value(a_norm).cols()) {
    throw Error(ErrorKind::ShapeMismatch, "gcn layer: adjacency is not square");
  }
  Var out = tape.matmul(a_norm, tape.matmul(h, w));
  return act == Activation::Relu ? tape.relu(out) : out;
}

std::size_t mlp_depth(const ParamSet& params, std::string_view prefix) {
  std::size_t depth = 0;
  while (params.contains(layer_name(prefix, depth, "weight"))) ++depth;
  return depth;
}

Matrix mlp_forward(const Matrix& h, const ParamSet& params, std::string_view prefix) {
  const std::size_t depth = mlp_depth(params, prefix);
  Matrix x = h;
  for (std::size_t k = 0; k < depth; ++k) {
    const Matrix& w = params.at(layer_name(prefix, k, "weight"));
    const Matrix& b = params.at(layer_name(prefix, k, "bias"));
    if (x.cols() != w.rows() || b.rows() != 1 || b.cols() != w.cols()) {
      throw Error(ErrorKind::ShapeMismatch, "mlp layer " + std::to_string(k) + " of " + std::string(prefix));
    }
    Matrix y = x * w;
    y.rowwise() += b.row(0);
    if (k + 1 < depth) y = y.cwiseMax(0.0);
    x = std::move(y);
  }
  return x;
}

Var mlp(Tape& tape, Var h, const BoundParams& params, std::string_view prefix) {
  Var x = h;
  std::size_t k = 0;
  while (params.contains(layer_name(prefix, k, "weight"))) {
    x = tape.add_bias(tape.matmul(x, params[layer_name(prefix, k, "weight")]),
                      params[layer_name(prefix, k, "bias")]);
    ++k;
    if (params.contains(layer_name(prefix, k, "weight"))) x = tape.relu(x);
  }
  return x;
}

void add_mlp_params(ParamSet& params, std::string_view prefix, std::span<const std::size_t> widths,
                    Rng& rng) {
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    params.add(layer_name(prefix, k, "weight"), glorot_uniform(widths[k], widths[k + 1], rng));
    params.add(layer_name(prefix, k, "bias"), Matrix::Zero(1, static_cast<Eigen::Index>(widths[k + 1])));
  }
}

double mse_loss(const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "mse: shapes differ");
  }
  if (pred.size() == 0) throw Error(ErrorKind::EmptyMatrix, "mse of empty matrices");
  return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

double cross_entropy_loss(const Matrix& logits, std::span<const int> labels) {
  Tape tape;
  return tape.scalar(tape.softmax_cross_entropy(tape.constant_ref(logits), labels));
}

}  // namespace nodefeat::nn
