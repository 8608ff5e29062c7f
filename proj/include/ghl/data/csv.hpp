#pragma once

// Canonical sample CSV plus its manifest sidecar (<csv>.manifest.json).
//
//   t,v_north,v_east,heading_deg,speed
//
// UTF-8, LF line endings, every number printed with 17 significant digits.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ghl/error.hpp"
#include "ghl/io.hpp"
#include "ghl/sample.hpp"

namespace ghl {

inline constexpr std::string_view kCsvHeader = "t,v_north,v_east,heading_deg,speed";

struct DatasetManifest {
  std::string label;
  std::string source = "simulative";  // simulative | recorded
  std::uint64_t sample_count = 0;
  std::pair<double, double> speed_range{0.0, 0.0};    // m/s
  std::pair<double, double> heading_range{0.0, 0.0};  // deg
  double duration_minutes = 0.0;
  std::optional<std::uint64_t> rng_seed;
  nlohmann::ordered_json details = nlohmann::ordered_json::object();  // generator / adapter settings

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["label"] = label;
    j["source"] = source;
    j["sample_count"] = sample_count;
    j["speed_range"] = {speed_range.first, speed_range.second};
    j["heading_range"] = {heading_range.first, heading_range.second};
    j["duration_minutes"] = duration_minutes;
    j["rng_seed"] = rng_seed ? nlohmann::ordered_json(*rng_seed) : nlohmann::ordered_json(nullptr);
    j["details"] = details;
    return j;
  }

  static DatasetManifest from_json(const nlohmann::ordered_json& j) {
    try {
      DatasetManifest m;
      m.label = j.at("label").get<std::string>();
      m.source = j.at("source").get<std::string>();
      m.sample_count = j.at("sample_count").get<std::uint64_t>();
      m.speed_range = {j.at("speed_range").at(0).get<double>(), j.at("speed_range").at(1).get<double>()};
      m.heading_range = {j.at("heading_range").at(0).get<double>(), j.at("heading_range").at(1).get<double>()};
      m.duration_minutes = j.at("duration_minutes").get<double>();
      if (j.contains("rng_seed") && !j.at("rng_seed").is_null()) m.rng_seed = j.at("rng_seed").get<std::uint64_t>();
      if (j.contains("details")) m.details = j.at("details");
      return m;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::SchemaMismatch, std::string("manifest: ") + e.what());
    }
  }
};

/// Manifest with count, ranges and duration taken from the data itself.
inline DatasetManifest describe(const Dataset& samples, std::string label, std::string source) {
  DatasetManifest m;
  m.label = std::move(label);
  m.source = std::move(source);
  m.sample_count = samples.size();
  if (!samples.empty()) {
    auto [smin, smax] = std::minmax_element(samples.begin(), samples.end(),
                                            [](const auto& a, const auto& b) { return a.true_speed < b.true_speed; });
    auto [hmin, hmax] = std::minmax_element(
        samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.true_heading_deg < b.true_heading_deg; });
    m.speed_range = {smin->true_speed, smax->true_speed};
    m.heading_range = {hmin->true_heading_deg, hmax->true_heading_deg};
    m.duration_minutes = (samples.back().timestamp - samples.front().timestamp) / 60.0;
  }
  return m;
}

inline std::string manifest_path(const std::string& csv_path) { return csv_path + ".manifest.json"; }

inline std::string to_csv(const Dataset& samples) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& s : samples) {
    out += format_double(s.timestamp);
    out += ',';
    out += format_double(s.measured.north());
    out += ',';
    out += format_double(s.measured.east());
    out += ',';
    out += format_double(s.true_heading_deg);
    out += ',';
    out += format_double(s.true_speed);
    out += '\n';
  }
  return out;
}

/// Writes the CSV and its manifest; the manifest's sample_count is checked
/// against the data.
inline void write_csv(const Dataset& samples, const DatasetManifest& manifest, const std::string& path) {
  if (manifest.sample_count != samples.size()) {
    throw Error(ErrorCode::SchemaMismatch, "manifest sample_count " + std::to_string(manifest.sample_count) +
                                               " != " + std::to_string(samples.size()) + " records");
  }
  write_text(path, to_csv(samples));
  write_text(manifest_path(path), manifest.to_json().dump(2) + "\n");
}

inline Dataset parse_csv(std::string_view text, const std::string& origin = "<memory>") {
  Dataset out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!header_seen) {
      if (line != kCsvHeader) {
        throw Error(ErrorCode::SchemaMismatch,
                    origin + ": expected header '" + std::string(kCsvHeader) + "', got '" + std::string(line) + "'");
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    double f[5];
    std::size_t field = 0, start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string_view tok = line.substr(start, comma == std::string_view::npos ? line.size() - start : comma - start);
      if (field >= 5 || !parse_double(tok, f[field])) {
        throw Error(ErrorCode::SchemaMismatch, origin + ":" + std::to_string(line_no) + ": malformed record");
      }
      ++field;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (field != 5) throw Error(ErrorCode::SchemaMismatch, origin + ":" + std::to_string(line_no) + ": expected 5 fields");
    try {
      out.push_back(LabeledSample{f[0], VelocityNE(f[1], f[2]), f[3], f[4]});
    } catch (const Error&) {
      throw Error(ErrorCode::SchemaMismatch, origin + ":" + std::to_string(line_no) + ": non-finite velocity");
    }
  }
  if (!header_seen) throw Error(ErrorCode::SchemaMismatch, origin + ": missing header");
  return out;
}

struct LoadedDataset {
  Dataset samples;
  DatasetManifest manifest;
};

/// Reads the CSV and its manifest. Without a sidecar the manifest is derived
/// from the data; with one, its sample_count must match the record count.
inline LoadedDataset read_csv(const std::string& path) {
  LoadedDataset out;
  out.samples = parse_csv(read_file(path), path);
  std::ifstream mf(manifest_path(path));
  if (mf) {
    nlohmann::ordered_json j;
    try {
      j = nlohmann::ordered_json::parse(mf);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::SchemaMismatch, manifest_path(path) + ": " + e.what());
    }
    out.manifest = DatasetManifest::from_json(j);
    if (out.manifest.sample_count != out.samples.size()) {
      throw Error(ErrorCode::SchemaMismatch, path + ": manifest says " + std::to_string(out.manifest.sample_count) +
                                                 " samples, file has " + std::to_string(out.samples.size()));
    }
  } else {
    out.manifest = describe(out.samples, path, "unknown");
  }
  return out;
}

}  // namespace ghl
