#pragma once

// Body-to-navigation kinematics and the speed/heading grid dataset generator.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ghl/error.hpp"
#include "ghl/heading.hpp"
#include "ghl/parallel.hpp"
#include "ghl/rng.hpp"
#include "ghl/sample.hpp"

namespace ghl {

struct Attitude {
  double roll_deg = 0.0;     // [-180, 180]
  double pitch_deg = 0.0;    // [-90, 90]
  double heading_deg = 0.0;  // [0, 360)

  void validate() const {
    if (!(roll_deg >= -180.0 && roll_deg <= 180.0) || !(pitch_deg >= -90.0 && pitch_deg <= 90.0) ||
        !(heading_deg >= 0.0 && heading_deg < 360.0)) {
      throw Error(ErrorCode::InvalidConfig, "attitude out of range");
    }
  }
};

using Vec3 = std::array<double, 3>;
using RotationMatrix = std::array<std::array<double, 3>, 3>;

/// Body (x forward, y right, z down) to navigation (north, east, down)
/// rotation for roll phi, pitch theta, heading psi.
inline RotationMatrix body_to_nav_matrix(const Attitude& a) {
  a.validate();
  const double phi = deg_to_rad(a.roll_deg);
  const double theta = deg_to_rad(a.pitch_deg);
  const double psi = deg_to_rad(a.heading_deg);
  const double cf = std::cos(phi), sf = std::sin(phi);
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cp = std::cos(psi), sp = std::sin(psi);
  return {{
      {cp * ct, -sp * cf + cp * st * sf, sp * sf + cp * cf * st},
      {sp * ct, cp * cf + sf * st * sp, -cp * sf + st * sp * cf},
      {-st, ct * sf, ct * cf},
  }};
}

inline Vec3 multiply(const RotationMatrix& m, const Vec3& v) noexcept {
  Vec3 out{};
  for (std::size_t r = 0; r < 3; ++r) {
    out[r] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2];
  }
  return out;
}

/// Navigation-frame velocity of a vehicle moving forward at `speed` with no
/// lateral or vertical body velocity.
inline Vec3 nav_velocity(double speed, const Attitude& a) {
  if (!(speed >= 0.0)) throw Error(ErrorCode::InvalidConfig, "speed must be >= 0");
  return multiply(body_to_nav_matrix(a), Vec3{speed, 0.0, 0.0});
}

inline VelocityNE add_noise(const VelocityNE& v, const NoiseModel& noise, Rng& rng) {
  if (noise.sigma_v == 0.0) return v;
  const double dn = rng.normal(0.0, noise.sigma_v);
  const double de = rng.normal(0.0, noise.sigma_v);
  return {v.north() + dn, v.east() + de};
}

struct SimGridConfig {
  double speed_min = 0.0;
  double speed_max = 3.5;
  double speed_step = 0.1;
  double heading_min = 0.0;
  double heading_max = 90.0;
  double heading_step = 0.5;
  std::size_t repeats_per_cell = 10;
  double sigma_v = 0.01;
  std::uint64_t rng_seed = 0;

  void validate() const;
  std::vector<double> speeds() const;
  std::vector<double> headings() const;
  std::size_t sample_count() const { return speeds().size() * headings().size() * repeats_per_cell; }
};

/// Grid values min + i*step, endpoints inclusive with half-step tolerance.
inline std::vector<double> grid_values(double min, double max, double step) {
  const auto n = static_cast<std::size_t>(std::floor((max - min) / step + 0.5)) + 1;
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = min + static_cast<double>(i) * step;
  return values;
}

inline void SimGridConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
  auto finite = [](double x) { return std::isfinite(x); };
  if (!finite(speed_min) || !finite(speed_max) || !finite(speed_step) || !finite(heading_min) ||
      !finite(heading_max) || !finite(heading_step) || !finite(sigma_v)) {
    fail("grid parameters must be finite");
  }
  if (!(speed_step > 0.0) || !(heading_step > 0.0)) fail("grid steps must be > 0");
  if (speed_min > speed_max) fail("speed_min > speed_max");
  if (heading_min > heading_max) fail("heading_min > heading_max");
  if (speed_min < 0.0) fail("speed_min must be >= 0");
  if (repeats_per_cell < 1) fail("repeats_per_cell must be >= 1");
  if (sigma_v < 0.0) fail("sigma_v must be >= 0");
  if (heading_min < 0.0 || headings().back() >= 360.0) fail("grid headings must lie in [0, 360)");
}

inline std::vector<double> SimGridConfig::speeds() const {
  return grid_values(speed_min, speed_max, speed_step);
}

inline std::vector<double> SimGridConfig::headings() const {
  return grid_values(heading_min, heading_max, heading_step);
}

/// Sweeps every (speed, heading) cell `repeats_per_cell` times with roll and
/// pitch zero, adding velocity noise to the north/east components.
///
/// Output order is speed-major, heading-minor, repeat-last. Cell k draws its
/// noise from Rng::stream(rng_seed, k), so the result does not depend on the
/// number of worker threads. Timestamps are the sample index at 10 Hz.
inline Dataset generate_grid_dataset(const SimGridConfig& cfg) {
  cfg.validate();
  const std::vector<double> speeds = cfg.speeds();
  const std::vector<double> headings = cfg.headings();
  const std::size_t repeats = cfg.repeats_per_cell;
  const std::size_t cells = speeds.size() * headings.size();
  const NoiseModel noise(cfg.sigma_v);

  Dataset out(cells * repeats);
  parallel_for(cells, [&](std::size_t cell) {
    const double speed = speeds[cell / headings.size()];
    const double heading = headings[cell % headings.size()];
    const Vec3 v_nav = nav_velocity(speed, Attitude{0.0, 0.0, heading});
    const VelocityNE nominal(v_nav[0], v_nav[1]);
    Rng rng = Rng::stream(cfg.rng_seed, cell);
    for (std::size_t r = 0; r < repeats; ++r) {
      const std::size_t index = cell * repeats + r;
      out[index] = LabeledSample{static_cast<double>(index) / 10.0, add_noise(nominal, noise, rng),
                                 heading, speed};
    }
  });
  return out;
}

}  // namespace ghl
