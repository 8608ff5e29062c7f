#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "ghl/error.hpp"
#include "ghl/heading.hpp"

namespace ghl {

struct MetricPair {
  double mae_deg = 0.0;
  double rmse_deg = 0.0;
};

namespace detail {

inline void check_aligned(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) {
    throw Error(ErrorCode::ShapeMismatch,
                std::to_string(pred.size()) + " predictions vs " + std::to_string(truth.size()) + " labels");
  }
  if (pred.empty()) throw Error(ErrorCode::EmptyInput, "no predictions");
}

}  // namespace detail

/// Mean absolute shortest-arc residual, degrees.
inline double mae(std::span<const double> pred, std::span<const double> truth) {
  detail::check_aligned(pred, truth);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(angle_diff_deg(pred[i], truth[i]));
  return sum / static_cast<double>(pred.size());
}

/// Root mean squared shortest-arc residual, degrees.
inline double rmse(std::span<const double> pred, std::span<const double> truth) {
  detail::check_aligned(pred, truth);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = angle_diff_deg(pred[i], truth[i]);
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(pred.size()));
}

inline MetricPair metrics(std::span<const double> pred, std::span<const double> truth) {
  return {mae(pred, truth), rmse(pred, truth)};
}

}  // namespace ghl
