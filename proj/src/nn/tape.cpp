#include "nodefeat/nn/tape.hpp"

#include <cmath>
#include <string>

#include "nodefeat/error.hpp"

namespace nodefeat::nn {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::ShapeMismatch, std::string(what) + ": " + shape(a) + " vs " + shape(b));
  }
}

}  // namespace

Var Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tape::Node& Tape::node(Var v) const {
  if (v.index >= nodes_.size()) throw Error(ErrorKind::IndexOutOfRange, "unknown tape variable");
  return nodes_[v.index];
}

const Matrix& Tape::value(Var v) const {
  const Node& n = node(v);
  return n.ref ? *n.ref : n.value;
}

double Tape::scalar(Var v) const {
  const Matrix& m = value(v);
  if (m.rows() != 1 || m.cols() != 1) throw Error(ErrorKind::ShapeMismatch, "not a scalar: " + shape(m));
  return m(0, 0);
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::constant_ref(const Matrix& value) {
  Node n;
  n.ref = &value;
  return push(std::move(n));
}

Var Tape::parameter(const Matrix& value) {
  Node n;
  n.ref = &value;
  n.requires_grad = true;
  return push(std::move(n));
}

Var Tape::matmul(Var a, Var b) {
  const Matrix& x = value(a);
  const Matrix& y = value(b);
  if (x.cols() != y.rows()) {
    throw Error(ErrorKind::ShapeMismatch, "matmul: " + shape(x) + " * " + shape(y));
  }
  Node n;
  n.op = Op::MatMul;
  n.a = a.index;
  n.b = b.index;
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  n.value.noalias() = x * y;
  return push(std::move(n));
}

Var Tape::sparse_matmul(const SparseMatrix& a, Var b) {
  const Matrix& y = value(b);
  if (a.cols() != y.rows()) {
    throw Error(ErrorKind::ShapeMismatch, "sparse_matmul: " + std::to_string(a.rows()) + "x" +
                                              std::to_string(a.cols()) + " * " + shape(y));
  }
  Node n;
  n.op = Op::SparseMatMul;
  n.b = b.index;
  n.sparse = &a;
  n.requires_grad = node(b).requires_grad;
  n.value = a * y;
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  require_same_shape(value(a), value(b), "add");
  Node n;
  n.op = Op::Add;
  n.a = a.index;
  n.b = b.index;
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  n.value = value(a) + value(b);
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  require_same_shape(value(a), value(b), "sub");
  Node n;
  n.op = Op::Sub;
  n.a = a.index;
  n.b = b.index;
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  n.value = value(a) - value(b);
  return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
  require_same_shape(value(a), value(b), "mul");
  Node n;
  n.op = Op::Mul;
  n.a = a.index;
  n.b = b.index;
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  n.value = value(a).cwiseProduct(value(b));
  return push(std::move(n));
}

Var Tape::add_bias(Var x, Var bias) {
  const Matrix& m = value(x);
  const Matrix& b = value(bias);
  if (b.rows() != 1 || b.cols() != m.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "add_bias: " + shape(m) + " + " + shape(b));
  }
  Node n;
  n.op = Op::AddBias;
  n.a = x.index;
  n.b = bias.index;
  n.requires_grad = node(x).requires_grad || node(bias).requires_grad;
  n.value = m.rowwise() + b.row(0);
  return push(std::move(n));
}

Var Tape::relu(Var x) {
  Node n;
  n.op = Op::Relu;
  n.a = x.index;
  n.requires_grad = node(x).requires_grad;
  n.value = value(x).cwiseMax(0.0);
  return push(std::move(n));
}

Var Tape::scale(Var x, double factor) {
  Node n;
  n.op = Op::Scale;
  n.a = x.index;
  n.factor = factor;
  n.requires_grad = node(x).requires_grad;
  n.value = value(x) * factor;
  return push(std::move(n));
}

Var Tape::mean_rows(Var x) {
  const Matrix& m = value(x);
  if (m.rows() == 0) throw Error(ErrorKind::EmptyMatrix, "mean_rows of an empty matrix");
  Node n;
  n.op = Op::MeanRows;
  n.a = x.index;
  n.requires_grad = node(x).requires_grad;
  n.value = m.colwise().mean();
  return push(std::move(n));
}

Var Tape::sum_all(Var x) {
  Node n;
  n.op = Op::SumAll;
  n.a = x.index;
  n.requires_grad = node(x).requires_grad;
  n.value = Matrix::Constant(1, 1, value(x).sum());
  return push(std::move(n));
}

Var Tape::mse(Var pred, const Matrix& target) {
  const Matrix& p = value(pred);
  require_same_shape(p, target, "mse");
  if (p.size() == 0) throw Error(ErrorKind::EmptyMatrix, "mse of empty matrices");
  Node n;
  n.op = Op::Mse;
  n.a = pred.index;
  n.requires_grad = node(pred).requires_grad;
  n.aux = p - target;
  n.value = Matrix::Constant(1, 1, n.aux.squaredNorm() / static_cast<double>(p.size()));
  return push(std::move(n));
}

Var Tape::softmax_cross_entropy(Var logits, std::span<const int> labels) {
  const Matrix& z = value(logits);
  if (static_cast<std::size_t>(z.rows()) != labels.size() || z.rows() == 0) {
    throw Error(ErrorKind::ShapeMismatch,
                "cross_entropy: " + shape(z) + " logits for " + std::to_string(labels.size()) + " labels");
  }
  Node n;
  n.op = Op::SoftmaxCrossEntropy;
  n.a = logits.index;
  n.requires_grad = node(logits).requires_grad;
  n.labels.assign(labels.begin(), labels.end());
  n.aux.resize(z.rows(), z.cols());
  double total = 0.0;
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const int y = labels[static_cast<std::size_t>(r)];
    if (y < 0 || y >= z.cols()) {
      throw Error(ErrorKind::ShapeMismatch, "cross_entropy: label " + std::to_string(y) +
                                                " outside " + std::to_string(z.cols()) + " classes");
    }
    const double mx = z.row(r).maxCoeff();
    const auto shifted = (z.row(r).array() - mx).eval();
    const double log_sum = std::log(shifted.exp().sum());
    n.aux.row(r) = (shifted - log_sum).exp().matrix();
    total += log_sum - shifted(y);
  }
  n.value = Matrix::Constant(1, 1, total / static_cast<double>(z.rows()));
  return push(std::move(n));
}

Var Tape::weighted_sse(Var pred, const Matrix& target, const Vector& row_weights) {
  const Matrix& p = value(pred);
  require_same_shape(p, target, "weighted_sse");
  if (row_weights.size() != p.rows()) {
    throw Error(ErrorKind::ShapeMismatch, "weighted_sse: " + std::to_string(row_weights.size()) +
                                              " weights for " + shape(p));
  }
  Node n;
  n.op = Op::WeightedSse;
  n.a = pred.index;
  n.requires_grad = node(pred).requires_grad;
  const Matrix residual = p - target;
  n.aux = residual.array().colwise() * row_weights.array();
  n.value = Matrix::Constant(1, 1, (n.aux.array() * residual.array()).sum());
  return push(std::move(n));
}

void Tape::backward(Var loss, double seed) {
  const Matrix& out = value(loss);
  if (out.rows() != 1 || out.cols() != 1) {
    throw Error(ErrorKind::ShapeMismatch, "backward needs a 1x1 output, got " + shape(out));
  }
  grads_.assign(nodes_.size(), Matrix());
  has_grad_.assign(nodes_.size(), false);
  grads_[loss.index] = Matrix::Constant(1, 1, seed);
  has_grad_[loss.index] = true;

  const auto send = [&](std::uint32_t target, auto&& contribution) {
    if (!nodes_[target].requires_grad) return;
    if (has_grad_[target]) {
      grads_[target] += contribution;
    } else {
      grads_[target] = contribution;
      has_grad_[target] = true;
    }
  };

  for (std::size_t i = loss.index + 1; i-- > 0;) {
    if (!has_grad_[i] || !nodes_[i].requires_grad) continue;
    const Node& n = nodes_[i];
    const Matrix& g = grads_[i];
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::MatMul: {
        const Matrix& x = value(Var{n.a});
        const Matrix& y = value(Var{n.b});
        if (nodes_[n.a].requires_grad) send(n.a, (g * y.transpose()).eval());
        if (nodes_[n.b].requires_grad) send(n.b, (x.transpose() * g).eval());
        break;
      }
      case Op::Add:
        send(n.a, g);
        send(n.b, g);
        break;
      case Op::Sub:
        send(n.a, g);
        send(n.b, (-g).eval());
        break;
      case Op::Mul:
        send(n.a, g.cwiseProduct(value(Var{n.b})).eval());
        send(n.b, g.cwiseProduct(value(Var{n.a})).eval());
        break;
      case Op::AddBias:
        send(n.a, g);
        send(n.b, Matrix(g.colwise().sum()));
        break;
      case Op::Relu: {
        const Matrix& x = value(Var{n.a});
        send(n.a, (x.array() > 0.0).select(g, 0.0).eval());
        break;
      }
      case Op::Scale:
        send(n.a, (g * n.factor).eval());
        break;
      case Op::MeanRows: {
        const Matrix& x = value(Var{n.a});
        const Matrix row = g / static_cast<double>(x.rows());
        send(n.a, row.replicate(x.rows(), 1).eval());
        break;
      }
      case Op::SumAll: {
        const Matrix& x = value(Var{n.a});
        send(n.a, Matrix::Constant(x.rows(), x.cols(), g(0, 0)).eval());
        break;
      }
      case Op::Mse:
        send(n.a, (n.aux * (2.0 * g(0, 0) / static_cast<double>(n.aux.size()))).eval());
        break;
      case Op::SoftmaxCrossEntropy: {
        Matrix d = n.aux;
        for (Eigen::Index r = 0; r < d.rows(); ++r) d(r, n.labels[static_cast<std::size_t>(r)]) -= 1.0;
        send(n.a, (d * (g(0, 0) / static_cast<double>(d.rows()))).eval());
        break;
      }
      case Op::SparseMatMul:
        send(n.b, Matrix(n.sparse->transpose() * g));
        break;
      case Op::WeightedSse:
        send(n.a, (n.aux * (2.0 * g(0, 0))).eval());
        break;
      default:
        throw Error(ErrorKind::UnsupportedPrimitive,
                    "no gradient rule for op " + std::to_string(static_cast<int>(n.op)));
    }
  }
}

Matrix Tape::grad(Var v) const {
  const Matrix& x = value(v);
  if (v.index < has_grad_.size() && has_grad_[v.index]) return grads_[v.index];
  return Matrix::Zero(x.rows(), x.cols());
}

}  // namespace nodefeat::nn
