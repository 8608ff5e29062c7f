#pragma once

#include <cmath>
#include <cstddef>

#include "ghl/error.hpp"
#include "ghl/nn/tensor.hpp"

namespace ghl::nn {

struct LossResult {
  double value = 0.0;
  Tensor grad;  // dLoss/dPred, shaped like pred
};

/// Mean absolute error (1/N) sum |pred - truth| and its subgradient; the
/// subgradient of |r| at r == 0 is taken as 0.
inline LossResult mae_loss(const Tensor& pred, const Tensor& truth) {
  if (pred.size() != truth.size()) {
    throw Error(ErrorCode::ShapeMismatch, "mae_loss: pred " + shape_string(pred.shape) + " vs truth " +
                                              shape_string(truth.shape));
  }
  if (pred.size() == 0) throw Error(ErrorCode::ShapeMismatch, "mae_loss: empty input");
  const double n = static_cast<double>(pred.size());
  LossResult out{0.0, Tensor(pred.shape)};
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = pred.values[i] - truth.values[i];
    sum += std::abs(r);
    out.grad.values[i] = r > 0.0 ? 1.0 / n : (r < 0.0 ? -1.0 / n : 0.0);
  }
  out.value = sum / n;
  return out;
}

}  // namespace ghl::nn
