#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ghl/error.hpp"
#include "ghl/nn/tensor.hpp"

namespace ghl::nn {

struct AdamWConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 1e-2;
};

/// One decoupled-weight-decay Adam update on a flat parameter block.
///
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
///   p <- p - lr (m / (1 - b1^t) / (sqrt(v / (1 - b2^t)) + eps) + wd p)
///
/// `step` is the 1-based index of this update.
inline void adamw_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                         std::span<double> v, std::uint64_t step, const AdamWConfig& cfg) {
  if (grads.size() != params.size() || m.size() != params.size() || v.size() != params.size()) {
    throw Error(ErrorCode::ShapeMismatch, "adamw: parameter, gradient and moment sizes differ");
  }
  const double t = static_cast<double>(step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    params[i] -= cfg.learning_rate * (m_hat / (std::sqrt(v_hat) + cfg.epsilon) + cfg.weight_decay * params[i]);
  }
}

/// Moment buffers for a fixed list of parameters.
struct AdamWState {
  AdamWConfig config;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::uint64_t step = 0;

  AdamWState() = default;
  AdamWState(AdamWConfig cfg, std::span<const Parameter> params) : config(cfg) {
    for (const auto& p : params) {
      first_moment.emplace_back(p.tensor->size(), 0.0);
      second_moment.emplace_back(p.tensor->size(), 0.0);
    }
  }
};

/// Applies one update to every parameter using its accumulated gradient.
inline void adamw_step(AdamWState& state, std::span<const Parameter> params) {
  if (params.size() != state.first_moment.size()) {
    throw Error(ErrorCode::ShapeMismatch, "adamw: parameter list does not match optimizer state");
  }
  ++state.step;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& t = *params[k].tensor;
    if (t.grad.size() != t.values.size()) {
      throw Error(ErrorCode::ShapeMismatch, "adamw: parameter " + params[k].name + " has no gradient");
    }
    adamw_update(t.values, t.grad, state.first_moment[k], state.second_moment[k], state.step, state.config);
  }
}

}  // namespace ghl::nn
