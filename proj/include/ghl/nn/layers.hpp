#pragma once

// Layer kinds used by the heading network: stride-1 valid 1-D convolution,
// batch normalization, tanh-form GELU, inverted dropout, flatten and a fully
// connected layer. Each layer caches what its backward pass needs during
// forward; calling backward without a fresh forward throws StaleGraph.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "ghl/error.hpp"
#include "ghl/nn/tensor.hpp"
#include "ghl/rng.hpp"

namespace ghl::nn {

enum class Mode { Training, Inference };

class Layer {
 public:
  explicit Layer(std::string name) : name_(std::move(name)) {}
  virtual ~Layer() = default;

  Layer(const Layer&) = delete;
  Layer& operator=(const Layer&) = delete;

  const std::string& name() const noexcept { return name_; }

  /// Canonical description of the layer's configuration, e.g. "conv1d(1,24,1)".
  virtual std::string signature() const = 0;
  virtual Shape output_shape(const Shape& input) const = 0;

  virtual Tensor forward(const Tensor& x) = 0;
  /// Accumulates parameter gradients and returns dLoss/dInput.
  virtual Tensor backward(const Tensor& grad_out) = 0;

  /// Trainable tensors.
  virtual std::vector<Parameter> parameters() { return {}; }
  /// Non-trainable state that must be checkpointed.
  virtual std::vector<Parameter> buffers() { return {}; }

  virtual void set_mode(Mode mode) { mode_ = mode; }
  Mode mode() const noexcept { return mode_; }

  /// Scales this layer's parameter-gradient contributions. Used only to
  /// demonstrate that gradient checking detects a broken backward pass.
  void inject_backward_fault(double factor) noexcept { fault_ = factor; }

 protected:
  void require_cache(bool present) const {
    if (!present) {
      throw Error(ErrorCode::StaleGraph, name_ + ": backward called without a matching forward");
    }
  }

  std::string name_;
  Mode mode_ = Mode::Inference;
  double fault_ = 1.0;
};

/// y[b, o, i] = bias[o] + sum_{c, k} W[o, c, k] * x[b, c, i + k]
/// (cross-correlation, no padding, stride 1).
class Conv1d final : public Layer {
 public:
  Conv1d(std::string name, std::size_t in_channels, std::size_t out_channels, std::size_t kernel_size)
      : Layer(std::move(name)),
        in_(in_channels),
        out_(out_channels),
        kernel_(kernel_size),
        weight_(Shape{out_channels, in_channels, kernel_size}),
        bias_(Shape{out_channels}) {
    if (kernel_size < 1) throw Error(ErrorCode::ShapeMismatch, "kernel size must be >= 1");
    weight_.enable_grad();
    bias_.enable_grad();
  }

  std::size_t in_channels() const noexcept { return in_; }
  std::size_t out_channels() const noexcept { return out_; }
  std::size_t kernel_size() const noexcept { return kernel_; }
  Tensor& weight() noexcept { return weight_; }
  Tensor& bias() noexcept { return bias_; }

  std::string signature() const override {
    return "conv1d(" + std::to_string(in_) + "," + std::to_string(out_) + "," + std::to_string(kernel_) + ")";
  }

  Shape output_shape(const Shape& input) const override {
    if (input.size() != 3 || input[1] != in_ || input[2] < kernel_) {
      throw Error(ErrorCode::ShapeMismatch, name_ + ": bad input shape " + shape_string(input));
    }
    return {input[0], out_, input[2] - kernel_ + 1};
  }

  Tensor forward(const Tensor& x) override {
    const Shape out_shape = output_shape(x.shape);
    batch_ = x.dim(0);
    length_ = x.dim(2);
    out_length_ = out_shape[2];
    const std::size_t rows = batch_ * out_length_;
    const std::size_t cols = in_ * kernel_;

    // im2col: row (b, i) holds x[b, c, i + k] for every (c, k).
    columns_.assign(rows * cols, 0.0);
    for (std::size_t b = 0; b < batch_; ++b) {
      for (std::size_t i = 0; i < out_length_; ++i) {
        double* row = &columns_[(b * out_length_ + i) * cols];
        for (std::size_t c = 0; c < in_; ++c) {
          const double* src = &x.values[(b * in_ + c) * length_ + i];
          for (std::size_t k = 0; k < kernel_; ++k) row[c * kernel_ + k] = src[k];
        }
      }
    }

    std::vector<double> weight_t(cols * out_);
    for (std::size_t o = 0; o < out_; ++o) {
      for (std::size_t j = 0; j < cols; ++j) weight_t[j * out_ + o] = weight_.values[o * cols + j];
    }

    // Rows are processed in blocks of kBlock so each weight row is loaded
    // once per block; every output row still sums over j in the same order,
    // so results do not depend on the batch size.
    std::vector<double> acc(kBlock * out_);
    Tensor y(out_shape);
    for (std::size_t n0 = 0; n0 < rows; n0 += kBlock) {
      const std::size_t nb = std::min(kBlock, rows - n0);
      for (std::size_t r = 0; r < kBlock; ++r) {
        std::copy(bias_.values.begin(), bias_.values.end(), acc.begin() + static_cast<std::ptrdiff_t>(r * out_));
      }
      const double* c0 = &columns_[n0 * cols];
      const double* c1 = nb > 1 ? c0 + cols : c0;
      const double* c2 = nb > 2 ? c0 + 2 * cols : c0;
      const double* c3 = nb > 3 ? c0 + 3 * cols : c0;
      double* a0 = acc.data();
      double* a1 = a0 + out_;
      double* a2 = a1 + out_;
      double* a3 = a2 + out_;
      for (std::size_t j = 0; j < cols; ++j) {
        const double x0 = c0[j], x1 = c1[j], x2 = c2[j], x3 = c3[j];
        const double* w = &weight_t[j * out_];
        for (std::size_t o = 0; o < out_; ++o) {
          const double wo = w[o];
          a0[o] += x0 * wo;
          a1[o] += x1 * wo;
          a2[o] += x2 * wo;
          a3[o] += x3 * wo;
        }
      }
      for (std::size_t r = 0; r < nb; ++r) {
        const std::size_t n = n0 + r;
        const std::size_t b = n / out_length_;
        const std::size_t i = n % out_length_;
        for (std::size_t o = 0; o < out_; ++o) y.values[(b * out_ + o) * out_length_ + i] = acc[r * out_ + o];
      }
    }
    cached_ = true;
    return y;
  }

  Tensor backward(const Tensor& grad_out) override {
    require_cache(cached_);
    require_shape(grad_out, Shape{batch_, out_, out_length_}, "conv1d backward");
    cached_ = false;
    const std::size_t rows = batch_ * out_length_;
    const std::size_t cols = in_ * kernel_;

    // Gradient rows regrouped as g[r][o] for a block of kBlock rows.
    std::vector<double> g(kBlock * out_, 0.0);
    std::vector<double> dcol(kBlock * cols);
    Tensor dx(Shape{batch_, in_, length_});
    for (std::size_t n0 = 0; n0 < rows; n0 += kBlock) {
      const std::size_t nb = std::min(kBlock, rows - n0);
      std::fill(g.begin(), g.end(), 0.0);
      for (std::size_t r = 0; r < nb; ++r) {
        const std::size_t b = (n0 + r) / out_length_;
        const std::size_t i = (n0 + r) % out_length_;
        for (std::size_t o = 0; o < out_; ++o) g[r * out_ + o] = grad_out.values[(b * out_ + o) * out_length_ + i];
      }
      // Padding rows carry zero gradient; their column pointers alias row 0.
      const double* c0 = &columns_[n0 * cols];
      const double* c1 = nb > 1 ? c0 + cols : c0;
      const double* c2 = nb > 2 ? c0 + 2 * cols : c0;
      const double* c3 = nb > 3 ? c0 + 3 * cols : c0;
      std::fill(dcol.begin(), dcol.end(), 0.0);
      double* __restrict d0 = dcol.data();
      double* __restrict d1 = d0 + cols;
      double* __restrict d2 = d1 + cols;
      double* __restrict d3 = d2 + cols;
      for (std::size_t o = 0; o < out_; ++o) {
        const double g0 = g[o], g1 = g[out_ + o], g2 = g[2 * out_ + o], g3 = g[3 * out_ + o];
        bias_.grad[o] += fault_ * (g0 + g1 + g2 + g3);
        const double s0 = fault_ * g0, s1 = fault_ * g1, s2 = fault_ * g2, s3 = fault_ * g3;
        double* __restrict dw = &weight_.grad[o * cols];
        for (std::size_t j = 0; j < cols; ++j) dw[j] += s0 * c0[j] + s1 * c1[j] + s2 * c2[j] + s3 * c3[j];
      }
      for (std::size_t o = 0; o < out_; ++o) {
        const double g0 = g[o], g1 = g[out_ + o], g2 = g[2 * out_ + o], g3 = g[3 * out_ + o];
        const double* __restrict w = &weight_.values[o * cols];
        for (std::size_t j = 0; j < cols; ++j) {
          const double wj = w[j];
          d0[j] += g0 * wj;
          d1[j] += g1 * wj;
          d2[j] += g2 * wj;
          d3[j] += g3 * wj;
        }
      }
      for (std::size_t r = 0; r < nb; ++r) {
        const std::size_t b = (n0 + r) / out_length_;
        const std::size_t i = (n0 + r) % out_length_;
        for (std::size_t c = 0; c < in_; ++c) {
          double* dst = &dx.values[(b * in_ + c) * length_ + i];
          for (std::size_t k = 0; k < kernel_; ++k) dst[k] += dcol[r * cols + c * kernel_ + k];
        }
      }
    }
    return dx;
  }

  std::vector<Parameter> parameters() override {
    return {{name_ + ".weight", &weight_}, {name_ + ".bias", &bias_}};
  }

 private:
  static constexpr std::size_t kBlock = 4;

  std::size_t in_, out_, kernel_;
  Tensor weight_, bias_;
  std::vector<double> columns_;
  std::size_t batch_ = 0, length_ = 0, out_length_ = 0;
  bool cached_ = false;
};

/// Per-channel batch normalization over [batch, channels, length] inputs.
///
/// Training mode normalizes with the biased batch variance and updates the
/// running statistics as running = (1 - momentum) * running + momentum * batch,
/// using the unbiased variance for running_var. Inference mode uses the running
/// statistics and leaves them untouched.
class BatchNorm1d final : public Layer {
 public:
  BatchNorm1d(std::string name, std::size_t channels, double momentum = 0.1, double epsilon = 1e-5)
      : Layer(std::move(name)),
        channels_(channels),
        momentum_(momentum),
        epsilon_(epsilon),
        gamma_(Shape{channels}, 1.0),
        beta_(Shape{channels}, 0.0),
        running_mean_(Shape{channels}, 0.0),
        running_var_(Shape{channels}, 1.0) {
    if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidConfig, "batch-norm epsilon must be > 0");
    if (!(momentum > 0.0 && momentum < 1.0)) {
      throw Error(ErrorCode::InvalidConfig, "batch-norm momentum must be in (0, 1)");
    }
    gamma_.enable_grad();
    beta_.enable_grad();
  }

  std::size_t channels() const noexcept { return channels_; }
  double momentum() const noexcept { return momentum_; }
  double epsilon() const noexcept { return epsilon_; }
  Tensor& gamma() noexcept { return gamma_; }
  Tensor& beta() noexcept { return beta_; }
  Tensor& running_mean() noexcept { return running_mean_; }
  Tensor& running_var() noexcept { return running_var_; }

  std::string signature() const override { return "batchnorm1d(" + std::to_string(channels_) + ")"; }

  Shape output_shape(const Shape& input) const override {
    if (input.size() != 3 || input[1] != channels_) {
      throw Error(ErrorCode::ShapeMismatch, name_ + ": bad input shape " + shape_string(input));
    }
    return input;
  }

  Tensor forward(const Tensor& x) override {
    output_shape(x.shape);
    shape_ = x.shape;
    const std::size_t batch = x.dim(0), length = x.dim(2);
    const std::size_t count = batch * length;
    normalized_.assign(x.size(), 0.0);
    inv_std_.assign(channels_, 0.0);
    Tensor y(x.shape);

    for (std::size_t c = 0; c < channels_; ++c) {
      double mean, var;
      if (mode_ == Mode::Training) {
        if (count < 2) {
          throw Error(ErrorCode::DegenerateBatch, name_ + ": batch x length must be >= 2 in training mode");
        }
        double sum = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t l = 0; l < length; ++l) sum += x.values[(b * channels_ + c) * length + l];
        }
        mean = sum / static_cast<double>(count);
        double sq = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t l = 0; l < length; ++l) {
            const double d = x.values[(b * channels_ + c) * length + l] - mean;
            sq += d * d;
          }
        }
        var = sq / static_cast<double>(count);
        const double unbiased = sq / static_cast<double>(count - 1);
        running_mean_.values[c] = (1.0 - momentum_) * running_mean_.values[c] + momentum_ * mean;
        running_var_.values[c] = (1.0 - momentum_) * running_var_.values[c] + momentum_ * unbiased;
      } else {
        mean = running_mean_.values[c];
        var = running_var_.values[c];
      }
      const double inv_std = 1.0 / std::sqrt(var + epsilon_);
      inv_std_[c] = inv_std;
      const double g = gamma_.values[c], be = beta_.values[c];
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t l = 0; l < length; ++l) {
          const std::size_t idx = (b * channels_ + c) * length + l;
          const double xhat = (x.values[idx] - mean) * inv_std;
          normalized_[idx] = xhat;
          y.values[idx] = g * xhat + be;
        }
      }
    }
    cached_mode_ = mode_;
    cached_ = true;
    return y;
  }

  Tensor backward(const Tensor& grad_out) override {
    require_cache(cached_);
    require_shape(grad_out, shape_, "batchnorm backward");
    cached_ = false;
    const std::size_t batch = shape_[0], length = shape_[2];
    const double count = static_cast<double>(batch * length);
    Tensor dx(shape_);
    for (std::size_t c = 0; c < channels_; ++c) {
      double sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t l = 0; l < length; ++l) {
          const std::size_t idx = (b * channels_ + c) * length + l;
          sum_dy += grad_out.values[idx];
          sum_dy_xhat += grad_out.values[idx] * normalized_[idx];
        }
      }
      gamma_.grad[c] += fault_ * sum_dy_xhat;
      beta_.grad[c] += fault_ * sum_dy;
      const double g = gamma_.values[c];
      const double inv_std = inv_std_[c];
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t l = 0; l < length; ++l) {
          const std::size_t idx = (b * channels_ + c) * length + l;
          if (cached_mode_ == Mode::Training) {
            dx.values[idx] = g * inv_std / count *
                             (count * grad_out.values[idx] - sum_dy - normalized_[idx] * sum_dy_xhat);
          } else {
            dx.values[idx] = g * inv_std * grad_out.values[idx];
          }
        }
      }
    }
    return dx;
  }

  std::vector<Parameter> parameters() override {
    return {{name_ + ".gamma", &gamma_}, {name_ + ".beta", &beta_}};
  }
  std::vector<Parameter> buffers() override {
    return {{name_ + ".running_mean", &running_mean_}, {name_ + ".running_var", &running_var_}};
  }

 private:
  std::size_t channels_;
  double momentum_, epsilon_;
  Tensor gamma_, beta_, running_mean_, running_var_;
  Shape shape_;
  std::vector<double> normalized_, inv_std_;
  Mode cached_mode_ = Mode::Inference;
  bool cached_ = false;
};

/// 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3)))
inline double gelu(double x) noexcept {
  constexpr double kAlpha = 0.7978845608028654;  // sqrt(2 / pi)
  return 0.5 * x * (1.0 + std::tanh(kAlpha * (x + 0.044715 * x * x * x)));
}

/// d gelu / dx given t = tanh(sqrt(2/pi) (x + 0.044715 x^3)).
inline double gelu_derivative(double x, double t) noexcept {
  constexpr double kAlpha = 0.7978845608028654;
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kAlpha * (1.0 + 3.0 * 0.044715 * x * x);
}

inline double gelu_derivative(double x) noexcept {
  constexpr double kAlpha = 0.7978845608028654;
  return gelu_derivative(x, std::tanh(kAlpha * (x + 0.044715 * x * x * x)));
}

class Gelu final : public Layer {
 public:
  explicit Gelu(std::string name) : Layer(std::move(name)) {}

  std::string signature() const override { return "gelu"; }
  Shape output_shape(const Shape& input) const override { return input; }

  Tensor forward(const Tensor& x) override {
    constexpr double kAlpha = 0.7978845608028654;
    input_ = x.values;
    tanh_.resize(x.size());
    Tensor y(x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double v = x.values[i];
      tanh_[i] = std::tanh(kAlpha * (v + 0.044715 * v * v * v));
      y.values[i] = 0.5 * v * (1.0 + tanh_[i]);
    }
    shape_ = x.shape;
    cached_ = true;
    return y;
  }

  Tensor backward(const Tensor& grad_out) override {
    require_cache(cached_);
    require_shape(grad_out, shape_, "gelu backward");
    cached_ = false;
    Tensor dx(shape_);
    for (std::size_t i = 0; i < dx.size(); ++i) dx.values[i] = grad_out.values[i] * gelu_derivative(input_[i], tanh_[i]);
    return dx;
  }

 private:
  std::vector<double> input_, tanh_;
  Shape shape_;
  bool cached_ = false;
};

/// Inverted dropout: in training mode each element is zeroed with probability
/// `rate` and survivors are scaled by 1 / (1 - rate). Identity at inference.
class Dropout final : public Layer {
 public:
  Dropout(std::string name, double rate, std::uint64_t seed = 0)
      : Layer(std::move(name)), rate_(rate), rng_(seed) {
    if (!(rate >= 0.0 && rate < 1.0)) throw Error(ErrorCode::InvalidConfig, "dropout rate must be in [0, 1)");
  }

  double rate() const noexcept { return rate_; }
  void reseed(std::uint64_t seed) { rng_ = Rng(seed); }

  std::string signature() const override { return "dropout"; }
  Shape output_shape(const Shape& input) const override { return input; }

  Tensor forward(const Tensor& x) override {
    shape_ = x.shape;
    cached_ = true;
    if (mode_ == Mode::Inference || rate_ == 0.0) {
      mask_.clear();
      return x;
    }
    const double keep_scale = 1.0 / (1.0 - rate_);
    mask_.resize(x.size());
    Tensor y(x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) {
      mask_[i] = rng_.uniform() < rate_ ? 0.0 : keep_scale;
      y.values[i] = x.values[i] * mask_[i];
    }
    return y;
  }

  Tensor backward(const Tensor& grad_out) override {
    require_cache(cached_);
    require_shape(grad_out, shape_, "dropout backward");
    cached_ = false;
    if (mask_.empty()) return grad_out;
    Tensor dx(shape_);
    for (std::size_t i = 0; i < dx.size(); ++i) dx.values[i] = grad_out.values[i] * mask_[i];
    return dx;
  }

 private:
  double rate_;
  Rng rng_;
  std::vector<double> mask_;
  Shape shape_;
  bool cached_ = false;
};

/// [batch, C, L] -> [batch, C * L]; feature index is c * L + l (channel-major).
class Flatten final : public Layer {
 public:
  explicit Flatten(std::string name) : Layer(std::move(name)) {}

  std::string signature() const override { return "flatten"; }

  Shape output_shape(const Shape& input) const override {
    if (input.size() != 3) throw Error(ErrorCode::ShapeMismatch, name_ + ": flatten expects rank 3");
    return {input[0], input[1] * input[2]};
  }

  Tensor forward(const Tensor& x) override {
    shape_ = x.shape;
    cached_ = true;
    return x.reshaped(output_shape(x.shape));
  }

  Tensor backward(const Tensor& grad_out) override {
    require_cache(cached_);
    cached_ = false;
    return grad_out.reshaped(shape_);
  }

 private:
  Shape shape_;
  bool cached_ = false;
};

/// y[b, o] = bias[o] + sum_i W[o, i] * x[b, i]
class Linear final : public Layer {
 public:
  Linear(std::string name, std::size_t in_features, std::size_t out_features)
      : Layer(std::move(name)),
        in_(in_features),
        out_(out_features),
        weight_(Shape{out_features, in_features}),
        bias_(Shape{out_features}) {
    weight_.enable_grad();
    bias_.enable_grad();
  }

  std::size_t in_features() const noexcept { return in_; }
  std::size_t out_features() const noexcept { return out_; }
  Tensor& weight() noexcept { return weight_; }
  Tensor& bias() noexcept { return bias_; }

  std::string signature() const override {
    return "linear(" + std::to_string(in_) + "," + std::to_string(out_) + ")";
  }

  Shape output_shape(const Shape& input) const override {
    if (input.size() != 2 || input[1] != in_) {
      throw Error(ErrorCode::ShapeMismatch, name_ + ": bad input shape " + shape_string(input));
    }
    return {input[0], out_};
  }

  Tensor forward(const Tensor& x) override {
    Tensor y(output_shape(x.shape));
    const std::size_t batch = x.dim(0);
    for (std::size_t b = 0; b < batch; ++b) {
      const double* xb = &x.values[b * in_];
      for (std::size_t o = 0; o < out_; ++o) {
        const double* w = &weight_.values[o * in_];
        double acc = bias_.values[o];
        for (std::size_t i = 0; i < in_; ++i) acc += w[i] * xb[i];
        y.values[b * out_ + o] = acc;
      }
    }
    input_ = x;
    cached_ = true;
    return y;
  }

  Tensor backward(const Tensor& grad_out) override {
    require_cache(cached_);
    const std::size_t batch = input_.dim(0);
    require_shape(grad_out, Shape{batch, out_}, "linear backward");
    cached_ = false;
    Tensor dx(input_.shape);
    for (std::size_t b = 0; b < batch; ++b) {
      const double* xb = &input_.values[b * in_];
      double* dxb = &dx.values[b * in_];
      for (std::size_t o = 0; o < out_; ++o) {
        const double g = grad_out.values[b * out_ + o];
        const double scaled = g * fault_;
        bias_.grad[o] += scaled;
        double* dw = &weight_.grad[o * in_];
        const double* w = &weight_.values[o * in_];
        for (std::size_t i = 0; i < in_; ++i) {
          dw[i] += scaled * xb[i];
          dxb[i] += g * w[i];
        }
      }
    }
    return dx;
  }

  std::vector<Parameter> parameters() override {
    return {{name_ + ".weight", &weight_}, {name_ + ".bias", &bias_}};
  }

 private:
  std::size_t in_, out_;
  Tensor weight_, bias_;
  Tensor input_;
  bool cached_ = false;
};

}  // namespace ghl::nn
