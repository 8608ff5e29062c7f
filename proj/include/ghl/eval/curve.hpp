#pragma once

// Monte-Carlo check of the heading error STD against sigma_v / speed.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ghl/error.hpp"
#include "ghl/heading.hpp"
#include "ghl/io.hpp"
#include "ghl/parallel.hpp"
#include "ghl/rng.hpp"
#include "ghl/simgen.hpp"

namespace ghl {

inline constexpr std::size_t kMinCurveDraws = 10000;

struct CurvePoint {
  double speed = 0.0;
  double empirical_std_deg = 0.0;
  double analytic_std_deg = 0.0;
};

/// For each speed, the STD of model-based heading errors over `draws` noisy
/// velocities at a fixed true heading. Speed i uses Rng::stream(seed, i).
inline std::vector<CurvePoint> std_vs_speed_curve(const NoiseModel& noise, std::span<const double> speeds,
                                                  std::size_t draws, std::uint64_t seed,
                                                  double heading_deg = 60.0) {
  if (draws < kMinCurveDraws) throw Error(ErrorCode::InvalidConfig, "at least 10000 draws per speed");
  for (double s : speeds) {
    if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::InvalidConfig, "curve speeds must be > 0");
  }
  std::vector<CurvePoint> out(speeds.size());
  parallel_for(speeds.size(), [&](std::size_t i) {
    const double speed = speeds[i];
    const Vec3 v = nav_velocity(speed, Attitude{0.0, 0.0, heading_deg});
    const VelocityNE nominal(v[0], v[1]);
    Rng rng = Rng::stream(seed, i);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t d = 0; d < draws; ++d) {
      const VelocityNE noisy = add_noise(nominal, noise, rng);
      const double err = angle_diff_deg(model_based_heading(noisy).heading_deg, heading_deg);
      sum += err;
      sum_sq += err * err;
    }
    const double n = static_cast<double>(draws);
    const double mean = sum / n;
    out[i] = {speed, std::sqrt(std::max(0.0, sum_sq / n - mean * mean)), heading_error_std_deg(noise, speed)};
  });
  return out;
}

inline std::string curve_csv(std::span<const CurvePoint> curve) {
  std::string out = "speed,empirical_std_deg,analytic_std_deg\n";
  for (const auto& p : curve) {
    out += format_shortest(p.speed) + ',' + format_shortest(p.empirical_std_deg) + ',' +
           format_shortest(p.analytic_std_deg) + '\n';
  }
  return out;
}

}  // namespace ghl
