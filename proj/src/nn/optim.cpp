#include "nodefeat/nn/optim.hpp"

#include <cmath>

#include "nodefeat/error.hpp"

namespace nodefeat::nn {

AdamState AdamState::init(const ParamSet& params, const AdamConfig& config) {
  AdamState s;
  s.config = config;
  s.first_moment = params.zeros_like();
  s.second_moment = params.zeros_like();
  return s;
}

void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state) {
  if (!params.same_layout(grads) || !params.same_layout(state.first_moment) ||
      !params.same_layout(state.second_moment)) {
    throw Error(ErrorKind::ShapeMismatch, "adam: parameter, gradient and moment layouts differ");
  }
  const auto& cfg = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Matrix& g = grads[k].value;
    Matrix& m = state.first_moment[k].value;
    Matrix& v = state.second_moment[k].value;
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    params[k].value.array() -= cfg.learning_rate * (m.array() / correction1) /
                               ((v.array() / correction2).sqrt() + cfg.epsilon);
  }
}

}  // namespace nodefeat::nn
