#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ghl/error.hpp"

namespace ghl::nn {

using Shape = std::vector<std::size_t>;

inline std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

/// Dense row-major tensor of doubles. `grad` is empty unless gradients were
/// requested, in which case it has the same length as `values`.
struct Tensor {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;

  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0) : shape(std::move(s)), values(element_count(shape), fill) {
    for (std::size_t extent : shape) {
      if (extent == 0) throw Error(ErrorCode::ShapeMismatch, "tensor extents must be positive");
    }
  }
  Tensor(Shape s, std::vector<double> data) : shape(std::move(s)), values(std::move(data)) {
    if (values.size() != element_count(shape)) {
      throw Error(ErrorCode::ShapeMismatch, "value count does not match shape " + shape_string(shape));
    }
  }

  std::size_t size() const noexcept { return values.size(); }
  std::size_t rank() const noexcept { return shape.size(); }
  std::size_t dim(std::size_t axis) const { return shape.at(axis); }

  bool has_grad() const noexcept { return !grad.empty(); }
  void enable_grad() { grad.assign(values.size(), 0.0); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

  std::span<double> data() noexcept { return values; }
  std::span<const double> data() const noexcept { return values; }

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  /// Same values under a new shape with equal element count.
  Tensor reshaped(Shape s) const {
    if (element_count(s) != values.size()) {
      throw Error(ErrorCode::ShapeMismatch,
                  "cannot reshape " + shape_string(shape) + " to " + shape_string(s));
    }
    return Tensor(std::move(s), values);
  }
};

inline void require_shape(const Tensor& t, const Shape& expected, const char* what) {
  if (t.shape != expected) {
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": expected " + shape_string(expected) +
                                              ", got " + shape_string(t.shape));
  }
}

inline void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank) {
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + ": expected rank " + std::to_string(rank) +
                                              ", got " + shape_string(t.shape));
  }
}

/// A trainable tensor with a stable name (used as the checkpoint key).
struct Parameter {
  std::string name;
  Tensor* tensor = nullptr;
};

}  // namespace ghl::nn
