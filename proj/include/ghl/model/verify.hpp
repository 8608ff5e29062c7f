#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ghl/data/ingest.hpp"
#include "ghl/error.hpp"
#include "ghl/model/ghnet.hpp"
#include "ghl/nn/gradcheck.hpp"
#include "ghl/rng.hpp"

namespace ghl {

struct GradcheckSetup {
  std::uint64_t seed = 0;
  std::size_t batch = 3;
  double tolerance = 1e-5;
  double step = 1e-5;
  std::string fault_layer;  // empty: pristine network
  double fault_factor = 1.01;
};

/// Gradient check of a freshly built GHNet (inference mode) under MAE loss.
///
/// Velocities are drawn from Rng::stream(seed, 4); each target sits 0.5 to
/// 1.5 degrees above or below the initial prediction. With an odd batch the
/// output-bias gradient is never zero.
inline nn::GradcheckReport gradcheck_ghnet(const GradcheckSetup& s = {}) {
  if (s.batch == 0) throw Error(ErrorCode::InvalidConfig, "gradcheck batch must be > 0");
  GHNet net = GHNet::build(s.seed);
  Rng rng = Rng::stream(s.seed, 4);
  Dataset batch;
  std::vector<VelocityNE> v;
  for (std::size_t i = 0; i < s.batch; ++i) {
    const double speed = rng.uniform(0.1, 3.5);
    const double heading = rng.uniform(0.0, 90.0);
    batch.push_back({static_cast<double>(i), heading_from_track(speed, heading), heading, speed});
    v.push_back(batch.back().measured);
  }
  net.set_normalization(Normalization::fit(batch));
  if (!s.fault_layer.empty()) {
    nn::Layer* layer = net.network().find(s.fault_layer);
    if (!layer) throw Error(ErrorCode::InvalidConfig, "no layer named '" + s.fault_layer + "'");
    layer->inject_backward_fault(s.fault_factor);
  }
  const nn::Tensor x = net.pack(v);
  net.network().set_mode(nn::Mode::Inference);
  nn::Tensor target = net.network().forward(x);
  for (double& t : target.values) {
    const double offset = rng.uniform(0.5, 1.5);
    t += rng.uniform() < 0.5 ? -offset : offset;
  }
  return nn::gradcheck(net.network(), x, target, s.tolerance, s.step);
}

}  // namespace ghl
