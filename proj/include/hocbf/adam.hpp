#pragma once

#include <cmath>
#include <cstdint>

#include "hocbf/mlp.hpp"

namespace hocbf {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment estimates for one parameter set.
struct AdamState {
  MlpParameters m;
  MlpParameters v;
  std::uint64_t steps = 0;

  explicit AdamState(const MlpParameters& like) : m(like.zeros_like()), v(like.zeros_like()) {}
};

/// Bias-corrected Adam update of `params` in place. `state.steps` counts the
/// updates applied so far and is advanced here.
inline void adam_step(MlpParameters& params, const MlpParameters& grad, AdamState& state,
                      const AdamConfig& cfg = {}) {
  ++state.steps;
  const double t = static_cast<double>(state.steps);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  const double lr = cfg.learning_rate;

  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.epsilon);
  };
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    update(params.weights[l], grad.weights[l], state.m.weights[l], state.v.weights[l]);
    update(params.biases[l], grad.biases[l], state.m.biases[l], state.v.biases[l]);
  }
}

}  // namespace hocbf
