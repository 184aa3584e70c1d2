#pragma once

#include <span>
#include <string_view>

#include "nodefeat/matrix.hpp"
#include "nodefeat/nn/params.hpp"
#include "nodefeat/nn/tape.hpp"

namespace nodefeat::nn {

enum class Activation { Identity, Relu };

/// act(A_norm * H * W).
Matrix gcn_layer_forward(const Matrix& a_norm, const Matrix& h, const Matrix& w, Activation act);
Var gcn_layer(Tape& tape, Var a_norm, Var h, Var w, Activation act);

/// Affine layers `<prefix>.<k>.weight` (d_in x d_out) and `<prefix>.<k>.bias`
/// (1 x d_out) for k = 0, 1, ... while present; relu between layers, linear
/// output.
Matrix mlp_forward(const Matrix& h, const ParamSet& params, std::string_view prefix);
Var mlp(Tape& tape, Var h, const BoundParams& params, std::string_view prefix);
std::size_t mlp_depth(const ParamSet& params, std::string_view prefix);

/// Appends a Glorot-initialized MLP with the given widths (input first).
void add_mlp_params(ParamSet& params, std::string_view prefix, std::span<const std::size_t> widths,
                    Rng& rng);

std::string layer_name(std::string_view prefix, std::size_t layer, std::string_view what);

enum class LossKind { Mse, CrossEntropy };

double mse_loss(const Matrix& pred, const Matrix& target);
double cross_entropy_loss(const Matrix& logits, std::span<const int> labels);

}  // namespace nodefeat::nn
