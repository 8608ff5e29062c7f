#pragma once

// Speed-binned comparison of a baseline and a model heading predictor.
//
// Bin k covers true speed [k*w, (k+1)*w) for k = 0 .. round(max_speed/w);
// bin 0 is labelled "<w", the others by their lower edge. Samples at or above
// the last upper edge go to the out_of_range row. Samples whose baseline is
// undefined (NaN, i.e. zero measured velocity) are excluded and counted.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "ghl/error.hpp"
#include "ghl/eval/metrics.hpp"
#include "ghl/heading.hpp"
#include "ghl/io.hpp"
#include "ghl/sample.hpp"

namespace ghl {

struct BinSpec {
  double width = 0.1;      // m/s
  double max_speed = 2.0;  // lower edge of the last bin

  void validate() const {
    if (!(width > 0.0) || !std::isfinite(width)) throw Error(ErrorCode::InvalidConfig, "bin width must be > 0");
    if (!(max_speed >= 0.0) || !std::isfinite(max_speed)) throw Error(ErrorCode::InvalidConfig, "max speed must be >= 0");
  }

  std::size_t bin_count() const { return static_cast<std::size_t>(std::llround(max_speed / width)) + 1; }

  /// Bin index of `speed`, or bin_count() when above the last bin.
  std::size_t index(double speed) const {
    if (speed < 0.0) return bin_count();
    const auto k = static_cast<std::size_t>(std::floor(speed / width + 1e-9));
    return std::min(k, bin_count());
  }

  double lower(std::size_t k) const { return static_cast<double>(k) * width; }

  std::string label(std::size_t k) const {
    auto tidy = [](double x) { return format_shortest(std::round(x * 1e9) / 1e9); };
    return k == 0 ? "<" + tidy(width) : tidy(lower(k));
  }
};

struct BinRow {
  std::string label;
  std::size_t count = 0;
  std::optional<double> baseline_rmse, model_rmse, rmse_improvement_pct;
  std::optional<double> baseline_mae, model_mae, mae_improvement_pct;
  std::optional<double> baseline_err_std, model_err_std;  // STD of signed errors
};

struct BinnedReport {
  BinSpec spec;
  std::vector<BinRow> bins;
  BinRow overall;        // every evaluated sample, in range or not
  BinRow out_of_range;   // speed beyond the last bin
  std::size_t excluded = 0;
  std::string std_kind = "signed";
};

/// 100 (baseline - model) / baseline; absent unless baseline > 0.
inline std::optional<double> improvement_pct(double baseline, double model) {
  if (!(baseline > 0.0)) return std::nullopt;
  return 100.0 * (baseline - model) / baseline;
}

/// Model-based heading per sample; NaN where the measured velocity is zero.
inline std::vector<double> baseline_predictions(std::span<const LabeledSample> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back(s.measured.north() == 0.0 && s.measured.east() == 0.0
                      ? std::numeric_limits<double>::quiet_NaN()
                      : model_based_heading(s.measured).heading_deg);
  }
  return out;
}

namespace detail {

inline double signed_error_std(std::span<const double> pred, std::span<const double> truth) {
  const double n = static_cast<double>(pred.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) mean += angle_diff_deg(pred[i], truth[i]);
  mean /= n;
  double ss = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = angle_diff_deg(pred[i], truth[i]) - mean;
    ss += d * d;
  }
  return std::sqrt(ss / n);
}

struct Bucket {
  std::vector<double> baseline, model, truth;

  BinRow row(std::string label) const {
    BinRow r;
    r.label = std::move(label);
    r.count = truth.size();
    if (truth.empty()) return r;
    const MetricPair b = metrics(baseline, truth);
    const MetricPair m = metrics(model, truth);
    r.baseline_rmse = b.rmse_deg;
    r.model_rmse = m.rmse_deg;
    r.rmse_improvement_pct = improvement_pct(b.rmse_deg, m.rmse_deg);
    r.baseline_mae = b.mae_deg;
    r.model_mae = m.mae_deg;
    r.mae_improvement_pct = improvement_pct(b.mae_deg, m.mae_deg);
    r.baseline_err_std = signed_error_std(baseline, truth);
    r.model_err_std = signed_error_std(model, truth);
    return r;
  }
};

}  // namespace detail

inline BinnedReport binned_report(std::span<const LabeledSample> samples, std::span<const double> baseline,
                                  std::span<const double> model, const BinSpec& spec = {}) {
  spec.validate();
  if (baseline.size() != samples.size() || model.size() != samples.size()) {
    throw Error(ErrorCode::ShapeMismatch, "prediction vectors not aligned with samples");
  }
  const std::size_t nbins = spec.bin_count();
  std::vector<detail::Bucket> buckets(nbins + 1);
  detail::Bucket all;
  BinnedReport report;
  report.spec = spec;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(baseline[i]) || !std::isfinite(model[i])) {
      ++report.excluded;
      continue;
    }
    const double truth = samples[i].true_heading_deg;
    for (detail::Bucket* b : {&buckets[spec.index(samples[i].true_speed)], &all}) {
      b->baseline.push_back(baseline[i]);
      b->model.push_back(model[i]);
      b->truth.push_back(truth);
    }
  }
  for (std::size_t k = 0; k < nbins; ++k) report.bins.push_back(buckets[k].row(spec.label(k)));
  report.out_of_range = buckets[nbins].row("out_of_range");
  report.overall = all.row("all");
  return report;
}

namespace detail {

inline nlohmann::ordered_json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline std::string opt_csv(const std::optional<double>& v) { return v ? format_shortest(*v) : std::string(); }

}  // namespace detail

inline constexpr const char* kReportColumns[] = {
    "speed_bin",     "baseline_rmse_deg",  "model_rmse_deg", "rmse_improvement_pct", "baseline_mae_deg",
    "model_mae_deg", "mae_improvement_pct", "count",         "baseline_err_std_deg", "model_err_std_deg"};

inline std::vector<const BinRow*> report_rows(const BinnedReport& r) {
  std::vector<const BinRow*> rows;
  for (const auto& b : r.bins) rows.push_back(&b);
  rows.push_back(&r.out_of_range);
  rows.push_back(&r.overall);
  return rows;
}

/// One line per bin, then out_of_range and all. Empty cells are null metrics.
inline std::string report_csv(const BinnedReport& r) {
  std::string out;
  for (std::size_t c = 0; c < std::size(kReportColumns); ++c) {
    if (c) out += ',';
    out += kReportColumns[c];
  }
  out += '\n';
  for (const BinRow* row : report_rows(r)) {
    out += row->label + ',' + detail::opt_csv(row->baseline_rmse) + ',' + detail::opt_csv(row->model_rmse) + ',' +
           detail::opt_csv(row->rmse_improvement_pct) + ',' + detail::opt_csv(row->baseline_mae) + ',' +
           detail::opt_csv(row->model_mae) + ',' + detail::opt_csv(row->mae_improvement_pct) + ',' +
           std::to_string(row->count) + ',' + detail::opt_csv(row->baseline_err_std) + ',' +
           detail::opt_csv(row->model_err_std) + '\n';
  }
  return out;
}

inline nlohmann::ordered_json report_json(const BinnedReport& r) {
  nlohmann::ordered_json j;
  j["bin_width"] = r.spec.width;
  j["max_speed"] = r.spec.max_speed;
  j["std_kind"] = r.std_kind;
  j["excluded"] = r.excluded;
  j["columns"] = kReportColumns;
  auto& rows = j["rows"] = nlohmann::ordered_json::array();
  for (const BinRow* row : report_rows(r)) {
    rows.push_back({{"speed_bin", row->label},
                    {"baseline_rmse_deg", detail::opt_json(row->baseline_rmse)},
                    {"model_rmse_deg", detail::opt_json(row->model_rmse)},
                    {"rmse_improvement_pct", detail::opt_json(row->rmse_improvement_pct)},
                    {"baseline_mae_deg", detail::opt_json(row->baseline_mae)},
                    {"model_mae_deg", detail::opt_json(row->model_mae)},
                    {"mae_improvement_pct", detail::opt_json(row->mae_improvement_pct)},
                    {"count", row->count},
                    {"baseline_err_std_deg", detail::opt_json(row->baseline_err_std)},
                    {"model_err_std_deg", detail::opt_json(row->model_err_std)}});
  }
  return j;
}

enum class ReportFormat { Csv, Json };

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  throw Error(ErrorCode::InvalidConfig, "format must be csv or json");
}

inline std::string render_report(const BinnedReport& r, ReportFormat format) {
  return format == ReportFormat::Csv ? report_csv(r) : report_json(r).dump(2) + "\n";
}

inline void emit_report(const BinnedReport& r, ReportFormat format, const std::string& path) {
  write_text(path, render_report(r, format));
}

}  // namespace ghl
