#pragma once

#include <cstdint>

#include "nodefeat/nn/params.hpp"

namespace nodefeat::nn {

struct AdamConfig {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  ParamSet first_moment;
  ParamSet second_moment;

  static AdamState init(const ParamSet& params, const AdamConfig& config = {});
};

/// One Adam update with bias correction; `state.step` is incremented first.
void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state);

}  // namespace nodefeat::nn
