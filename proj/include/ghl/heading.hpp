#pragma once

// Model-based heading from GNSS north/east velocity and its first-order
// error model.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "ghl/error.hpp"

namespace ghl {

inline constexpr double kDegPerRad = 180.0 / std::numbers::pi;
inline constexpr double kRadPerDeg = std::numbers::pi / 180.0;

constexpr double deg_to_rad(double deg) noexcept { return deg * kRadPerDeg; }
constexpr double rad_to_deg(double rad) noexcept { return rad * kDegPerRad; }

/// Wraps an angle in degrees into [0, 360).
inline double wrap_deg_360(double deg) noexcept {
  double wrapped = std::fmod(deg, 360.0);
  if (wrapped < 0.0) wrapped += 360.0;
  // fmod of a tiny negative value plus 360 can round up to exactly 360.
  if (wrapped >= 360.0) wrapped = 0.0;
  return wrapped;
}

/// Signed shortest-arc difference a - b in degrees, in [-180, 180).
inline double angle_diff_deg(double a, double b) noexcept {
  double d = std::fmod(a - b, 360.0);
  if (d >= 180.0) d -= 360.0;
  if (d < -180.0) d += 360.0;
  return d;
}

/// North/east velocity in the navigation frame, m/s.
class VelocityNE {
 public:
  VelocityNE(double v_north, double v_east) : north_(v_north), east_(v_east) {
    if (!std::isfinite(v_north) || !std::isfinite(v_east)) {
      throw Error(ErrorCode::InvalidConfig, "velocity components must be finite");
    }
  }

  double north() const noexcept { return north_; }
  double east() const noexcept { return east_; }

  friend bool operator==(const VelocityNE&, const VelocityNE&) = default;

 private:
  double north_;
  double east_;
};

/// Standard deviation of each GNSS velocity component (zero-mean Gaussian).
struct NoiseModel {
  double sigma_v = 0.0;  // m/s

  explicit NoiseModel(double sigma) : sigma_v(sigma) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
      throw Error(ErrorCode::InvalidConfig, "sigma_v must be finite and >= 0");
    }
  }
};

struct HeadingEstimate {
  double heading_deg = 0.0;             // [0, 360)
  std::optional<double> sigma_deg;      // absent when no noise model applied
};

/// sqrt(v_north^2 + v_east^2).
inline double horizontal_speed(const VelocityNE& v) noexcept {
  return std::hypot(v.north(), v.east());
}

/// Heading of the velocity vector, clockwise from north, in [0, 360).
///
/// Uses the two-argument arctangent; for first-quadrant inputs this equals
/// atan(v_east / v_north).
inline HeadingEstimate model_based_heading(const VelocityNE& v) {
  if (v.north() == 0.0 && v.east() == 0.0) {
    throw Error(ErrorCode::ZeroSpeed, "heading undefined for zero velocity");
  }
  return {wrap_deg_360(rad_to_deg(std::atan2(v.east(), v.north()))), std::nullopt};
}

/// sigma_v / speed, radians.
inline double heading_error_std(const NoiseModel& noise, double speed) {
  if (!(speed > 0.0)) {
    throw Error(ErrorCode::ZeroSpeed, "heading error STD is singular at speed " +
                                          std::to_string(speed));
  }
  return noise.sigma_v / speed;
}

inline double heading_error_std_deg(const NoiseModel& noise, double speed) {
  return rad_to_deg(heading_error_std(noise, speed));
}

/// Heading plus its analytic uncertainty under `noise`.
inline HeadingEstimate model_based_heading(const VelocityNE& v, const NoiseModel& noise) {
  HeadingEstimate estimate = model_based_heading(v);
  estimate.sigma_deg = heading_error_std_deg(noise, horizontal_speed(v));
  return estimate;
}

}  // namespace ghl
