#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ghl/nn/layers.hpp"

namespace ghl::nn {

/// Ordered chain of layers with reverse-mode backward over the chain.
class Sequential {
 public:
  Sequential() = default;
  Sequential(Sequential&&) noexcept = default;
  Sequential& operator=(Sequential&&) noexcept = default;

  template <typename L, typename... Args>
  L& add(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    layer->set_mode(mode_);
    layers_.push_back(std::move(layer));
    return ref;
  }

  std::size_t size() const noexcept { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }

  Layer* find(const std::string& name) {
    for (auto& l : layers_) {
      if (l->name() == name) return l.get();
    }
    return nullptr;
  }

  void set_mode(Mode mode) {
    mode_ = mode;
    for (auto& l : layers_) l->set_mode(mode);
  }
  Mode mode() const noexcept { return mode_; }

  /// Shape after every layer, starting with `input`. Throws ShapeMismatch on
  /// the first inconsistent link.
  std::vector<Shape> shape_chain(const Shape& input) const {
    std::vector<Shape> chain{input};
    for (const auto& l : layers_) chain.push_back(l->output_shape(chain.back()));
    return chain;
  }

  Tensor forward(const Tensor& x) {
    Tensor h = x;
    for (auto& l : layers_) h = l->forward(h);
    pending_backward_ = true;
    return h;
  }

  /// Runs layers [first, size()) on `x`, the input of layer `first`. Earlier
  /// layers keep their caches, so no backward may follow.
  Tensor forward_from(std::size_t first, const Tensor& x) {
    Tensor h = x;
    for (std::size_t i = first; i < layers_.size(); ++i) h = layers_[i]->forward(h);
    pending_backward_ = false;
    return h;
  }

  /// Propagates dLoss/dOutput back through the chain, accumulating parameter
  /// gradients. Requires a forward since the last backward.
  Tensor backward(const Tensor& grad_out) {
    if (!pending_backward_) {
      throw Error(ErrorCode::StaleGraph, "backward called without a matching forward");
    }
    pending_backward_ = false;
    Tensor g = grad_out;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
  }

  std::vector<Parameter> parameters() {
    std::vector<Parameter> out;
    for (auto& l : layers_) {
      for (auto& p : l->parameters()) out.push_back(p);
    }
    return out;
  }

  std::vector<Parameter> buffers() {
    std::vector<Parameter> out;
    for (auto& l : layers_) {
      for (auto& p : l->buffers()) out.push_back(p);
    }
    return out;
  }

  void zero_grad() {
    for (auto& p : parameters()) p.tensor->zero_grad();
  }

  std::size_t parameter_count() {
    std::size_t n = 0;
    for (auto& p : parameters()) n += p.tensor->size();
    return n;
  }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
  Mode mode_ = Mode::Inference;
  bool pending_backward_ = false;
};

}  // namespace ghl::nn
