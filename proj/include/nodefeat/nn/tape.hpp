#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nodefeat/matrix.hpp"

namespace nodefeat::nn {

/// Handle to a value recorded on a Tape.
struct Var {
  std::uint32_t index = 0;
};

/// Records a forward computation over dense matrices and replays it in
/// reverse to obtain exact gradients of a scalar output.
///
/// Leaves created with `constant_ref` / `parameter` alias caller-owned
/// matrices, which must outlive the tape. Gradients are only kept for nodes
/// that depend on a parameter.
class Tape {
 public:
  enum class Op : std::uint8_t {
    Leaf,
    MatMul,
    Add,
    Sub,
    Mul,
    AddBias,
    Relu,
    Scale,
    MeanRows,
    SumAll,
    Mse,
    SoftmaxCrossEntropy,
    SparseMatMul,
    WeightedSse,
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var constant_ref(const Matrix& value);
  Var parameter(const Matrix& value);

  Var matmul(Var a, Var b);
  /// Constant sparse matrix times `b`; `a` must outlive the tape.
  Var sparse_matmul(const SparseMatrix& a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  /// Elementwise product.
  Var mul(Var a, Var b);
  /// Adds a 1 x d row to every row of an N x d matrix.
  Var add_bias(Var x, Var bias);
  Var relu(Var x);
  Var scale(Var x, double factor);
  /// Column-wise mean: N x d -> 1 x d.
  Var mean_rows(Var x);
  /// Sum of all entries: -> 1 x 1.
  Var sum_all(Var x);
  /// Mean of squared entry differences against a constant target: -> 1 x 1.
  Var mse(Var pred, const Matrix& target);
  /// Mean over rows of -log softmax(row)[label]; log-softmax is stabilized
  /// by subtracting the row max.
  Var softmax_cross_entropy(Var logits, std::span<const int> labels);
  /// sum_r w_r * ||pred_r - target_r||^2 with one weight per row: -> 1 x 1.
  Var weighted_sse(Var pred, const Matrix& target, const Vector& row_weights);

  const Matrix& value(Var v) const;
  double scalar(Var v) const;

  /// Reverse pass from a 1 x 1 node. `seed` scales the output gradient.
  void backward(Var loss, double seed = 1.0);

  /// Gradient of the last backward() output with respect to `v`
  /// (zero matrix when v does not influence it).
  Matrix grad(Var v) const;

  std::size_t size() const { return nodes_.size(); }
  Op op(Var v) const { return nodes_[v.index].op; }

 private:
  struct Node {
    Op op = Op::Leaf;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    bool requires_grad = false;
    double factor = 0.0;
    const Matrix* ref = nullptr;
    const SparseMatrix* sparse = nullptr;
    Matrix value;
    Matrix aux;  // softmax probabilities / mse residual
    std::vector<int> labels;
  };

  Var push(Node node);
  const Node& node(Var v) const;

  std::vector<Node> nodes_;
  std::vector<Matrix> grads_;
  std::vector<bool> has_grad_;
};

}  // namespace nodefeat::nn
