#pragma once

// The heading regression network: five pointwise (K=1) convolutions, each
// followed by batch normalization and GELU, then dropout, flatten and four
// fully connected layers. Input is one channel of length 2 holding the
// (normalized) north and east velocity; output is heading in degrees.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "ghl/error.hpp"
#include "ghl/heading.hpp"
#include "ghl/nn/layers.hpp"
#include "ghl/nn/sequential.hpp"
#include "ghl/rng.hpp"
#include "ghl/sample.hpp"

namespace ghl {

struct ConvSpec {
  std::size_t in, out;
};

inline constexpr std::array<ConvSpec, 5> kConvStack{{{1, 24}, {24, 48}, {48, 96}, {96, 192}, {192, 48}}};
inline constexpr std::size_t kInputLength = 2;  // [v_north, v_east]
inline constexpr std::array<std::size_t, 5> kLinearWidths{96, 60, 10, 5, 1};
inline constexpr double kDefaultDropout = 0.1;
inline constexpr double kStdFloor = 1e-6;

inline std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Per-feature z-score of the (v_north, v_east) input, fit on training data.
struct Normalization {
  enum class Kind { ZScore, Raw };

  Kind kind = Kind::ZScore;
  std::array<double, 2> mean{0.0, 0.0};
  std::array<double, 2> stddev{1.0, 1.0};
  bool fitted = false;

  static Normalization raw() { return {Kind::Raw, {0.0, 0.0}, {1.0, 1.0}, true}; }

  /// Fits on velocities only; labels are never consulted.
  static Normalization fit(std::span<const LabeledSample> train) {
    if (train.empty()) throw Error(ErrorCode::EmptyDataset, "cannot fit normalization on an empty set");
    const double n = static_cast<double>(train.size());
    std::array<double, 2> mean{0.0, 0.0};
    for (const auto& s : train) {
      mean[0] += s.measured.north();
      mean[1] += s.measured.east();
    }
    mean[0] /= n;
    mean[1] /= n;
    std::array<double, 2> var{0.0, 0.0};
    for (const auto& s : train) {
      const double dn = s.measured.north() - mean[0];
      const double de = s.measured.east() - mean[1];
      var[0] += dn * dn;
      var[1] += de * de;
    }
    return {Kind::ZScore,
            mean,
            {std::max(std::sqrt(var[0] / n), kStdFloor), std::max(std::sqrt(var[1] / n), kStdFloor)},
            true};
  }

  friend bool operator==(const Normalization&, const Normalization&) = default;
};

inline const char* to_string(Normalization::Kind kind) {
  return kind == Normalization::Kind::Raw ? "raw" : "zscore";
}

struct GHNetOptions {
  double dropout_rate = kDefaultDropout;
  double bn_momentum = 0.1;
  double bn_epsilon = 1e-5;
};

class GHNet {
 public:
  using Options = GHNetOptions;

  /// Builds the network and draws every conv/linear weight and bias from
  /// U(-1/sqrt(fan_in), 1/sqrt(fan_in)) using Rng::stream(seed, 0), in
  /// parameter order. Batch-norm gamma = 1, beta = 0, running mean 0, var 1.
  static GHNet build(std::uint64_t seed, Options options = {}) {
    GHNet g(options);
    g.seed_ = seed;
    Rng rng = Rng::stream(seed, 0);
    for (std::size_t i = 0; i < g.net_.size(); ++i) {
      nn::Layer& l = g.net_.layer(i);
      std::size_t fan_in = 0;
      if (auto* conv = dynamic_cast<nn::Conv1d*>(&l)) fan_in = conv->in_channels() * conv->kernel_size();
      if (auto* lin = dynamic_cast<nn::Linear*>(&l)) fan_in = lin->in_features();
      if (fan_in == 0) continue;
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (auto& p : l.parameters()) {
        for (double& v : p.tensor->values) v = rng.uniform(-bound, bound);
      }
    }
    g.dropout().reseed(Rng::stream(seed, 1).next_u64());
    return g;
  }

  GHNet(GHNet&&) noexcept = default;
  GHNet& operator=(GHNet&&) noexcept = default;

  nn::Sequential& network() noexcept { return net_; }
  const Options& options() const noexcept { return options_; }
  std::uint64_t seed() const noexcept { return seed_; }

  Normalization& normalization() noexcept { return norm_; }
  const Normalization& normalization() const noexcept { return norm_; }
  void set_normalization(const Normalization& n) { norm_ = n; }

  nn::Dropout& dropout() { return static_cast<nn::Dropout&>(*net_.find("dropout")); }

  /// Layer signatures joined by ';', the input to the fingerprint.
  std::string architecture() const {
    std::string s;
    for (std::size_t i = 0; i < net_.size(); ++i) {
      if (i) s += ';';
      s += net_.layer(i).signature();
    }
    return s;
  }

  std::string fingerprint() const { return hex64(fnv1a64(architecture())); }

  std::size_t parameter_count() { return net_.parameter_count(); }

  /// Packs velocities as [batch, 1, 2] after normalization.
  nn::Tensor pack(std::span<const VelocityNE> batch) const {
    if (!norm_.fitted) throw Error(ErrorCode::UnfittedNormalization, "normalization statistics not fitted");
    if (batch.empty()) throw Error(ErrorCode::EmptyDataset, "empty batch");
    nn::Tensor x(nn::Shape{batch.size(), 1, kInputLength});
    for (std::size_t b = 0; b < batch.size(); ++b) {
      x.values[2 * b] = (batch[b].north() - norm_.mean[0]) / norm_.stddev[0];
      x.values[2 * b + 1] = (batch[b].east() - norm_.mean[1]) / norm_.stddev[1];
    }
    return x;
  }

  /// Heading in degrees for each velocity, computed in inference mode.
  std::vector<double> predict(std::span<const VelocityNE> velocities, std::size_t chunk = 1024) {
    net_.set_mode(nn::Mode::Inference);
    std::vector<double> out;
    out.reserve(velocities.size());
    for (std::size_t start = 0; start < velocities.size(); start += chunk) {
      const std::size_t n = std::min(chunk, velocities.size() - start);
      const nn::Tensor y = net_.forward(pack(velocities.subspan(start, n)));
      out.insert(out.end(), y.values.begin(), y.values.end());
    }
    return out;
  }

  std::vector<double> predict(std::span<const LabeledSample> samples, std::size_t chunk = 1024) {
    std::vector<VelocityNE> v;
    v.reserve(samples.size());
    for (const auto& s : samples) v.push_back(s.measured);
    return predict(std::span<const VelocityNE>(v), chunk);
  }

 private:
  explicit GHNet(Options options) : options_(options) {
    std::size_t k = 1;
    for (const ConvSpec& c : kConvStack) {
      const std::string idx = std::to_string(k++);
      net_.add<nn::Conv1d>("conv" + idx, c.in, c.out, 1);
      net_.add<nn::BatchNorm1d>("bn" + idx, c.out, options.bn_momentum, options.bn_epsilon);
      net_.add<nn::Gelu>("gelu" + idx);
    }
    net_.add<nn::Dropout>("dropout", options.dropout_rate);
    net_.add<nn::Flatten>("flatten");
    for (std::size_t i = 0; i + 1 < kLinearWidths.size(); ++i) {
      net_.add<nn::Linear>("fc" + std::to_string(i + 1), kLinearWidths[i], kLinearWidths[i + 1]);
    }
    // Any inconsistency in the chain is a construction error.
    const auto chain = net_.shape_chain(nn::Shape{1, 1, kInputLength});
    if (chain.back() != nn::Shape{1, 1}) throw Error(ErrorCode::ShapeMismatch, "network does not end in one output");
  }

  Options options_;
  nn::Sequential net_;
  Normalization norm_{};
  std::uint64_t seed_ = 0;
};

}  // namespace ghl
