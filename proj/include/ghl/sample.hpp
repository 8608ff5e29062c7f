#pragma once

#include <vector>

#include "ghl/heading.hpp"

namespace ghl {

/// One epoch: measured velocity with its ground-truth heading and speed.
struct LabeledSample {
  double timestamp = 0.0;  // s
  VelocityNE measured{0.0, 0.0};
  double true_heading_deg = 0.0;  // [0, 360)
  double true_speed = 0.0;        // m/s

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

using Dataset = std::vector<LabeledSample>;

}  // namespace ghl
