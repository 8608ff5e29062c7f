#pragma once

// Recorded-track ingestion: ground-truth poses plus GNSS epochs resampled to
// a uniform grid and turned into LabeledSamples.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ghl/error.hpp"
#include "ghl/heading.hpp"
#include "ghl/io.hpp"
#include "ghl/sample.hpp"

namespace ghl {

/// Ground-truth pose; positions in a local planar frame (m), yaw in degrees.
struct PoseRecord {
  double t = 0.0;
  double north = 0.0;
  double east = 0.0;
  double yaw_deg = 0.0;
};

/// GNSS epoch. speed/course are the receiver's speed over ground (m/s) and
/// track (deg); north/east is the planar fix.
struct GnssRecord {
  double t = 0.0;
  double north = 0.0;
  double east = 0.0;
  std::optional<double> speed;
  std::optional<double> course_deg;

  bool has_track() const noexcept { return speed.has_value() && course_deg.has_value(); }
};

struct RecordedTrack {
  std::vector<PoseRecord> ground_truth;
  std::vector<GnssRecord> gnss;

  void validate() const {
    auto increasing = [](const auto& v) {
      for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i].t > v[i - 1].t)) return false;
      }
      return true;
    };
    if (!increasing(ground_truth)) throw Error(ErrorCode::InvalidConfig, "ground-truth timestamps not strictly increasing");
    if (!increasing(gnss)) throw Error(ErrorCode::InvalidConfig, "GNSS timestamps not strictly increasing");
  }
};

enum class VelocitySource {
  Auto,   // receiver speed/track when present, else differentiated fixes
  Track,  // receiver speed/track only; epochs without it stay unpaired
  Fixes,  // central differences of planar fixes
};

inline const char* to_string(VelocitySource s) {
  switch (s) {
    case VelocitySource::Auto: return "auto";
    case VelocitySource::Track: return "track";
    case VelocitySource::Fixes: return "fixes";
  }
  return "?";
}

inline VelocitySource parse_velocity_source(std::string_view s) {
  if (s == "auto") return VelocitySource::Auto;
  if (s == "track") return VelocitySource::Track;
  if (s == "fixes") return VelocitySource::Fixes;
  throw Error(ErrorCode::InvalidConfig, "velocity source must be auto, track or fixes");
}

struct IngestConfig {
  double rate_hz = 10.0;
  double tolerance_s = 0.05;
  double heading_min_deg = 0.0;  // inclusive
  double heading_max_deg = 90.0;  // inclusive
  VelocitySource velocity_source = VelocitySource::Auto;
  double min_pair_fraction = 0.5;

  void validate() const {
    if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) throw Error(ErrorCode::InvalidConfig, "rate must be > 0");
    if (!(tolerance_s > 0.0)) throw Error(ErrorCode::InvalidConfig, "pairing tolerance must be > 0");
    if (!(heading_min_deg <= heading_max_deg)) throw Error(ErrorCode::InvalidConfig, "heading filter min > max");
    if (!(min_pair_fraction >= 0.0 && min_pair_fraction <= 1.0)) {
      throw Error(ErrorCode::InvalidConfig, "min_pair_fraction must be in [0, 1]");
    }
  }

  nlohmann::ordered_json to_json() const {
    return {{"rate_hz", rate_hz},
            {"pairing", "nearest neighbour"},
            {"tolerance_s", tolerance_s},
            {"heading_filter_deg", {heading_min_deg, heading_max_deg}},
            {"gnss_velocity", to_string(velocity_source)},
            {"ground_truth_speed", "central difference of ground-truth positions"},
            {"min_pair_fraction", min_pair_fraction}};
  }
};

struct IngestStats {
  std::size_t grid_instants = 0;
  std::size_t paired = 0;
  std::size_t out_of_heading_range = 0;
  std::size_t stationary = 0;  // ground-truth speed 0 or GNSS velocity exactly zero
  std::size_t kept = 0;

  nlohmann::ordered_json to_json() const {
    return {{"grid_instants", grid_instants},
            {"paired", paired},
            {"out_of_heading_range", out_of_heading_range},
            {"stationary", stationary},
            {"kept", kept}};
  }
};

struct IngestResult {
  Dataset samples;
  IngestStats stats;
};

/// (speed cos course, speed sin course).
inline VelocityNE heading_from_track(double speed_over_ground, double course_deg) {
  if (!(speed_over_ground >= 0.0)) throw Error(ErrorCode::InvalidConfig, "speed over ground must be >= 0");
  const double c = deg_to_rad(course_deg);
  return {speed_over_ground * std::cos(c), speed_over_ground * std::sin(c)};
}

namespace detail {

/// Index of the record nearest to t within tol, if any.
template <class Record>
std::optional<std::size_t> nearest(const std::vector<Record>& records, double t, double tol) {
  auto it = std::lower_bound(records.begin(), records.end(), t,
                             [](const Record& r, double x) { return r.t < x; });
  std::optional<std::size_t> best;
  double best_d = tol;
  auto consider = [&](std::size_t i) {
    const double d = std::abs(records[i].t - t);
    if (d <= best_d) {
      best_d = d;
      best = i;
    }
  };
  const auto i = static_cast<std::size_t>(it - records.begin());
  if (i > 0) consider(i - 1);
  if (i < records.size()) consider(i);
  return best;
}

/// Central difference of planar position at record i (one-sided at the ends).
template <class Record>
VelocityNE differentiate(const std::vector<Record>& r, std::size_t i) {
  const std::size_t a = i > 0 ? i - 1 : i;
  const std::size_t b = i + 1 < r.size() ? i + 1 : i;
  if (a == b) return {0.0, 0.0};
  const double dt = r[b].t - r[a].t;
  return {(r[b].north - r[a].north) / dt, (r[b].east - r[a].east) / dt};
}

}  // namespace detail

/// Resamples `track` onto the grid t = k / rate_hz covering the shared time
/// window, pairs each instant with the nearest pose and GNSS epoch, and keeps
/// instants whose heading lies in the filter range and that are not stationary.
inline IngestResult ingest_recorded(const RecordedTrack& track, const IngestConfig& cfg = {}) {
  cfg.validate();
  track.validate();
  const auto& gt = track.ground_truth;
  const auto& gnss = track.gnss;
  if (gt.empty() || gnss.empty()) throw Error(ErrorCode::NoOverlap, "a stream is empty");
  const double start = std::max(gt.front().t, gnss.front().t);
  const double end = std::min(gt.back().t, gnss.back().t);
  const double k0 = std::ceil(start * cfg.rate_hz - 1e-9);
  const double k1 = std::floor(end * cfg.rate_hz + 1e-9);
  if (!(start <= end) || k0 > k1) throw Error(ErrorCode::NoOverlap, "streams share no grid instant");

  IngestResult out;
  out.stats.grid_instants = static_cast<std::size_t>(k1 - k0) + 1;
  for (double k = k0; k <= k1; k += 1.0) {
    const double t = k / cfg.rate_hz;
    const auto pose = detail::nearest(gt, t, cfg.tolerance_s);
    const auto fix = detail::nearest(gnss, t, cfg.tolerance_s);
    if (!pose || !fix) continue;

    std::optional<VelocityNE> measured;
    const GnssRecord& g = gnss[*fix];
    switch (cfg.velocity_source) {
      case VelocitySource::Auto:
        measured = g.has_track() ? heading_from_track(*g.speed, *g.course_deg) : detail::differentiate(gnss, *fix);
        break;
      case VelocitySource::Track:
        if (g.has_track()) measured = heading_from_track(*g.speed, *g.course_deg);
        break;
      case VelocitySource::Fixes:
        measured = detail::differentiate(gnss, *fix);
        break;
    }
    if (!measured) continue;
    ++out.stats.paired;

    const double heading = wrap_deg_360(gt[*pose].yaw_deg);
    const double speed = horizontal_speed(detail::differentiate(gt, *pose));
    if (heading < cfg.heading_min_deg || heading > cfg.heading_max_deg) {
      ++out.stats.out_of_heading_range;
      continue;
    }
    if (!(speed > 0.0) || (measured->north() == 0.0 && measured->east() == 0.0)) {
      ++out.stats.stationary;
      continue;
    }
    out.samples.push_back(LabeledSample{t, *measured, heading, speed});
  }
  out.stats.kept = out.samples.size();
  if (static_cast<double>(out.stats.paired) < cfg.min_pair_fraction * static_cast<double>(out.stats.grid_instants)) {
    throw Error(ErrorCode::SparseStream, std::to_string(out.stats.paired) + " of " +
                                             std::to_string(out.stats.grid_instants) + " grid instants paired");
  }
  return out;
}

// ---------------------------------------------------------------------------
// NCLT file layouts.

/// Column mapping for the NCLT ground-truth and GPS CSV files. Zero-based
/// column indices; timestamps are scaled to seconds and angles to degrees.
struct NcltLayout {
  // groundtruth_*.csv: utime, x, y, z, roll, pitch, yaw
  std::size_t gt_time = 0;
  std::size_t gt_north = 1;
  std::size_t gt_east = 2;
  std::size_t gt_yaw = 6;
  // gps.csv: utime, mode, num_satellites, lat, lng, alt, track, speed
  std::size_t gps_time = 0;
  std::size_t gps_lat = 3;
  std::size_t gps_lon = 4;
  std::size_t gps_track = 6;
  std::size_t gps_speed = 7;

  double time_scale = 1e-6;            // utime (us) -> s
  double angle_scale = kDegPerRad;     // rad -> deg, applied to yaw, lat, lng and track
  double earth_radius_m = 6378137.0;

  nlohmann::ordered_json to_json() const {
    return {{"ground_truth_columns", {{"t", gt_time}, {"north", gt_north}, {"east", gt_east}, {"yaw", gt_yaw}}},
            {"gps_columns",
             {{"t", gps_time}, {"lat", gps_lat}, {"lon", gps_lon}, {"track", gps_track}, {"speed", gps_speed}}},
            {"time_scale", time_scale},
            {"angle_scale", angle_scale},
            {"earth_radius_m", earth_radius_m}};
  }
};

namespace detail {

/// Numeric fields of one CSV line; empty when any field fails to parse.
inline std::vector<double> numeric_fields(std::string_view line) {
  std::vector<double> f;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    const std::string_view tok = line.substr(start, comma == std::string_view::npos ? line.size() - start : comma - start);
    double v;
    if (!parse_double(tok, v)) {
      std::string s(tok);
      s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
      if (s == "nan" || s == "NaN" || s == "NAN") {
        v = std::nan("");
      } else {
        return {};
      }
    }
    f.push_back(v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return f;
}

/// Calls fn(fields) for every numeric row; header or malformed rows are
/// skipped.
template <class Fn>
void for_each_row(std::string_view text, Fn fn) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const std::vector<double> f = numeric_fields(line);
    if (!f.empty()) fn(f);
  }
}

}  // namespace detail

/// Parses NCLT ground truth. Rows with non-finite fields or a timestamp not
/// after the previous kept row are skipped.
inline std::vector<PoseRecord> parse_nclt_ground_truth(std::string_view text, const NcltLayout& layout = {}) {
  const std::size_t need = std::max({layout.gt_time, layout.gt_north, layout.gt_east, layout.gt_yaw}) + 1;
  std::vector<PoseRecord> out;
  detail::for_each_row(text, [&](const std::vector<double>& f) {
    if (f.size() < need) return;
    PoseRecord p{f[layout.gt_time] * layout.time_scale, f[layout.gt_north], f[layout.gt_east],
                 f[layout.gt_yaw] * layout.angle_scale};
    if (!std::isfinite(p.t) || !std::isfinite(p.north) || !std::isfinite(p.east) || !std::isfinite(p.yaw_deg)) return;
    if (!out.empty() && !(p.t > out.back().t)) return;
    out.push_back(p);
  });
  if (out.empty()) throw Error(ErrorCode::SchemaMismatch, "no usable ground-truth rows");
  return out;
}

/// Parses NCLT GPS. Latitude/longitude become planar north/east around the
/// first usable fix; a non-finite track or speed leaves that field absent.
inline std::vector<GnssRecord> parse_nclt_gps(std::string_view text, const NcltLayout& layout = {}) {
  const std::size_t need =
      std::max({layout.gps_time, layout.gps_lat, layout.gps_lon, layout.gps_track, layout.gps_speed}) + 1;
  std::vector<GnssRecord> out;
  double lat0 = 0.0, lon0 = 0.0, cos_lat0 = 1.0;
  detail::for_each_row(text, [&](const std::vector<double>& f) {
    if (f.size() < need) return;
    const double t = f[layout.gps_time] * layout.time_scale;
    const double lat = f[layout.gps_lat] * layout.angle_scale;
    const double lon = f[layout.gps_lon] * layout.angle_scale;
    if (!std::isfinite(t) || !std::isfinite(lat) || !std::isfinite(lon)) return;
    if (!out.empty() && !(t > out.back().t)) return;
    if (out.empty()) {
      lat0 = lat;
      lon0 = lon;
      cos_lat0 = std::cos(deg_to_rad(lat0));
    }
    GnssRecord g;
    g.t = t;
    g.north = layout.earth_radius_m * deg_to_rad(lat - lat0);
    g.east = layout.earth_radius_m * cos_lat0 * deg_to_rad(lon - lon0);
    const double track = f[layout.gps_track] * layout.angle_scale;
    const double speed = f[layout.gps_speed];
    if (std::isfinite(track) && std::isfinite(speed) && speed >= 0.0) {
      g.course_deg = track;
      g.speed = speed;
    }
    out.push_back(g);
  });
  if (out.empty()) throw Error(ErrorCode::SchemaMismatch, "no usable GPS rows");
  return out;
}

inline RecordedTrack load_nclt(const std::string& ground_truth_path, const std::string& gps_path,
                               const NcltLayout& layout = {}) {
  return {parse_nclt_ground_truth(read_file(ground_truth_path), layout), parse_nclt_gps(read_file(gps_path), layout)};
}

}  // namespace ghl
