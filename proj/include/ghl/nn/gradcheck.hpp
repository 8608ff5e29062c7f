#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ghl/nn/loss.hpp"
#include "ghl/nn/sequential.hpp"

namespace ghl::nn {

struct GradcheckEntry {
  std::string name;
  std::size_t elements = 0;
  double max_abs_error = 0.0;
  /// max_i |analytic_i - numeric_i| / max_i max(|analytic_i|, |numeric_i|);
  /// 0 when both gradients vanish identically.
  double max_rel_error = 0.0;
  bool passed = true;
};

struct GradcheckReport {
  double tolerance = 0.0;
  double step = 0.0;
  std::vector<GradcheckEntry> entries;

  bool passed() const {
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed; });
  }
  double max_rel_error() const {
    double worst = 0.0;
    for (const auto& e : entries) worst = std::max(worst, e.max_rel_error);
    return worst;
  }
};

/// Compares the gradients already accumulated in `params` against central
/// finite differences (L(p + h) - L(p - h)) / 2h of `loss`, which must
/// evaluate the scalar loss deterministically without touching gradients.
template <typename LossFn>
GradcheckReport gradcheck(std::span<const Parameter> params, LossFn&& loss, double tolerance,
                          double step = 1e-5) {
  GradcheckReport report{tolerance, step, {}};
  for (const Parameter& p : params) {
    Tensor& t = *p.tensor;
    GradcheckEntry entry{p.name, t.size()};
    double scale = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double original = t.values[i];
      t.values[i] = original + step;
      const double plus = loss();
      t.values[i] = original - step;
      const double minus = loss();
      t.values[i] = original;
      const double numeric = (plus - minus) / (2.0 * step);
      const double analytic = t.grad[i];
      entry.max_abs_error = std::max(entry.max_abs_error, std::abs(analytic - numeric));
      scale = std::max({scale, std::abs(analytic), std::abs(numeric)});
    }
    entry.max_rel_error = scale > 0.0 ? entry.max_abs_error / scale : 0.0;
    entry.passed = entry.max_rel_error < tolerance;
    report.entries.push_back(entry);
  }
  return report;
}

/// Gradient check of `net` under MAE loss on one batch. The network is run in
/// inference mode (frozen batch-norm statistics, dropout off) and restored to
/// its previous mode afterwards.
inline GradcheckReport gradcheck(Sequential& net, const Tensor& input, const Tensor& target, double tolerance,
                                 double step = 1e-5) {
  const Mode previous = net.mode();
  net.set_mode(Mode::Inference);
  net.zero_grad();
  const Tensor out = net.forward(input);
  const LossResult l = mae_loss(out, target);
  net.backward(l.grad);

  // Perturbing a parameter of layer k only changes layers k.. onward.
  std::vector<Tensor> inputs{input};
  for (std::size_t k = 0; k + 1 < net.size(); ++k) inputs.push_back(net.layer(k).forward(inputs.back()));
  GradcheckReport report{tolerance, step, {}};
  for (std::size_t k = 0; k < net.size(); ++k) {
    auto params = net.layer(k).parameters();
    if (params.empty()) continue;
    auto eval = [&] { return mae_loss(net.forward_from(k, inputs[k]), target).value; };
    GradcheckReport part = gradcheck(std::span<const Parameter>(params), eval, tolerance, step);
    report.entries.insert(report.entries.end(), part.entries.begin(), part.entries.end());
  }
  net.set_mode(previous);
  return report;
}

}  // namespace ghl::nn
