#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "ghl/eval/curve.hpp"
#include "ghl/eval/metrics.hpp"
#include "ghl/eval/report.hpp"

using namespace ghl;

namespace {

const std::string kData = GHL_TEST_DATA;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

LabeledSample at(double speed, double heading) {
  return {0.0, VelocityNE(speed * std::cos(heading * kRadPerDeg), speed * std::sin(heading * kRadPerDeg)), heading,
          speed};
}

struct Fixture {
  std::vector<LabeledSample> samples;
  std::vector<double> baseline, model;
};

// Mirrors tests/data/make_golden_report.py, plus one sample without a baseline.
Fixture golden_fixture() {
  Fixture f;
  const double rows[][4] = {{0.2, 10, 12, 11}, {0.3, 20, 16, 21}, {0.7, 45, 50, 44}, {0.9, 359, 1, 358}, {1.2, 30, 33, 30}};
  for (const auto& r : rows) {
    f.samples.push_back(at(r[0], r[1]));
    f.baseline.push_back(r[2]);
    f.model.push_back(r[3]);
  }
  f.samples.push_back(at(0.4, 50));
  f.baseline.push_back(kNaN);
  f.model.push_back(50);
  return f;
}

BinnedReport golden_report() {
  const Fixture f = golden_fixture();
  return binned_report(f.samples, f.baseline, f.model, BinSpec{0.5, 0.5});
}

}  // namespace

TEST(Metrics, Examples) {
  const std::vector<double> p{10, 20}, t{12, 16};
  EXPECT_DOUBLE_EQ(mae(p, t), 3.0);
  EXPECT_DOUBLE_EQ(rmse(p, t), std::sqrt(10.0));
  const std::vector<double> q{13, 16}, u{10, 20};  // residuals 3, -4
  EXPECT_DOUBLE_EQ(rmse(q, u), std::sqrt(12.5));
  const std::vector<double> a{359}, b{1};
  EXPECT_DOUBLE_EQ(mae(a, b), 2.0);
  EXPECT_DOUBLE_EQ(rmse(b, a), 2.0);
}

TEST(Metrics, RmseDominatesMae) {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p, t;
    const std::size_t n = 1 + rng.uniform_index(50);
    for (std::size_t i = 0; i < n; ++i) {
      p.push_back(rng.uniform(0, 360));
      t.push_back(rng.uniform(0, 360));
    }
    const MetricPair m = metrics(p, t);
    EXPECT_GE(m.rmse_deg, m.mae_deg - 1e-12);
    EXPECT_GE(m.mae_deg, 0.0);
    EXPECT_LE(m.rmse_deg, 180.0);
  }
}

TEST(Metrics, Errors) {
  const std::vector<double> empty, one{1.0}, two{1.0, 2.0};
  try {
    mae(empty, empty);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyInput);
  }
  try {
    rmse(one, two);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}

TEST(Report, ImprovementPct) {
  EXPECT_DOUBLE_EQ(*improvement_pct(10.0, 4.0), 60.0);
  EXPECT_DOUBLE_EQ(*improvement_pct(3.0, 3.0), 0.0);
  EXPECT_LT(*improvement_pct(2.0, 3.0), 0.0);
  EXPECT_FALSE(improvement_pct(0.0, 1.0).has_value());
}

TEST(Report, BinSpec) {
  const BinSpec s;
  EXPECT_EQ(s.bin_count(), 21u);
  EXPECT_EQ(s.label(0), "<0.1");
  EXPECT_EQ(s.label(3), "0.3");
  EXPECT_EQ(s.label(20), "2");
  EXPECT_EQ(s.index(0.0), 0u);
  EXPECT_EQ(s.index(0.3), 3u);  // 0.3 / 0.1 = 2.9999999999999996
  EXPECT_EQ(s.index(0.7), 7u);
  EXPECT_EQ(s.index(2.05), 20u);
  EXPECT_EQ(s.index(2.1), 21u);
  EXPECT_EQ(s.index(3.5), 21u);
  EXPECT_THROW((BinSpec{0.0, 1.0}.validate()), Error);
  EXPECT_THROW((BinSpec{0.1, -1.0}.validate()), Error);
}

TEST(Report, HandTable) {
  const BinnedReport r = golden_report();
  ASSERT_EQ(r.bins.size(), 2u);
  EXPECT_EQ(r.excluded, 1u);
  const BinRow& low = r.bins[0];
  EXPECT_EQ(low.label, "<0.5");
  EXPECT_EQ(low.count, 2u);
  EXPECT_DOUBLE_EQ(*low.baseline_mae, 3.0);
  EXPECT_DOUBLE_EQ(*low.model_mae, 1.0);
  EXPECT_DOUBLE_EQ(*low.baseline_rmse, 3.1622776601683795);
  EXPECT_DOUBLE_EQ(*low.mae_improvement_pct, 66.66666666666667);
  EXPECT_DOUBLE_EQ(*low.baseline_err_std, 3.0);
  const BinRow& high = r.bins[1];
  EXPECT_EQ(high.count, 2u);
  EXPECT_DOUBLE_EQ(*high.baseline_mae, 3.5);
  EXPECT_DOUBLE_EQ(*high.baseline_rmse, 3.8078865529319543);
  EXPECT_DOUBLE_EQ(*high.baseline_err_std, 1.5);
  EXPECT_EQ(r.out_of_range.count, 1u);
  EXPECT_DOUBLE_EQ(*r.out_of_range.mae_improvement_pct, 100.0);
  EXPECT_EQ(r.overall.count, 5u);
  EXPECT_DOUBLE_EQ(*r.overall.baseline_err_std, 3.0066592756745814);
  EXPECT_DOUBLE_EQ(*r.overall.mae_improvement_pct, 75.0);
}

TEST(Report, EmptyBinsAreNull) {
  const Fixture f = golden_fixture();
  const BinnedReport sparse = binned_report(f.samples, f.baseline, f.model, BinSpec{0.1, 2.0});
  const BinRow& b10 = sparse.bins[10];
  EXPECT_EQ(b10.count, 0u);
  EXPECT_FALSE(b10.baseline_mae.has_value());
  EXPECT_FALSE(b10.model_rmse.has_value());
  EXPECT_FALSE(b10.mae_improvement_pct.has_value());
  EXPECT_FALSE(b10.model_err_std.has_value());
  const std::string csv = report_csv(sparse);
  EXPECT_NE(csv.find("\n1,,,,,,,0,,\n"), std::string::npos);
  EXPECT_TRUE(report_json(sparse)["rows"][10]["model_mae_deg"].is_null());
}

TEST(Report, CountsPartitionSamples) {
  Rng rng(12);
  std::vector<LabeledSample> s;
  std::vector<double> b, m;
  for (int i = 0; i < 2000; ++i) {
    s.push_back(at(rng.uniform(0.0, 3.0), rng.uniform(0.0, 90.0)));
    b.push_back(i % 97 == 0 ? kNaN : rng.uniform(0.0, 90.0));
    m.push_back(rng.uniform(0.0, 90.0));
  }
  const BinnedReport r = binned_report(s, b, m);
  std::size_t total = r.out_of_range.count;
  for (const auto& row : r.bins) total += row.count;
  EXPECT_EQ(total, r.overall.count);
  EXPECT_EQ(total + r.excluded, s.size());
  EXPECT_EQ(r.excluded, 21u);
}

TEST(Report, MisalignedInputs) {
  const Fixture f = golden_fixture();
  std::vector<double> short_model(f.model.begin(), f.model.end() - 1);
  EXPECT_THROW(binned_report(f.samples, f.baseline, short_model), Error);
}

TEST(Report, BaselinePredictions) {
  std::vector<LabeledSample> s{at(1.0, 30.0), {0.0, VelocityNE(0.0, 0.0), 10.0, 0.0}};
  const auto b = baseline_predictions(s);
  EXPECT_NEAR(b[0], 30.0, 1e-12);
  EXPECT_TRUE(std::isnan(b[1]));
}

TEST(Report, GoldenCsvBytes) {
  EXPECT_EQ(report_csv(golden_report()), read_file(kData + "/golden_report.csv"));
}

TEST(Report, CsvAndJsonAgree) {
  const BinnedReport r = golden_report();
  const auto j = report_json(r);
  EXPECT_EQ(j["bin_width"], 0.5);
  EXPECT_EQ(j["excluded"], 1);
  EXPECT_EQ(j["std_kind"], "signed");
  const std::string csv = report_csv(r);
  std::vector<std::string> lines;
  for (std::size_t pos = 0; pos < csv.size();) {
    const std::size_t nl = csv.find('\n', pos);
    lines.push_back(csv.substr(pos, nl - pos));
    pos = nl + 1;
  }
  ASSERT_EQ(lines.size(), j["rows"].size() + 1);
  for (std::size_t i = 0; i < j["rows"].size(); ++i) {
    std::string rebuilt;
    for (const char* col : kReportColumns) {
      const auto& v = j["rows"][i][col];
      if (std::string_view(col) != "speed_bin") rebuilt += ',';
      if (v.is_string()) {
        rebuilt += v.get<std::string>();
      } else if (v.is_number_unsigned()) {
        rebuilt += std::to_string(v.get<std::size_t>());
      } else if (!v.is_null()) {
        rebuilt += format_shortest(v.get<double>());
      }
    }
    EXPECT_EQ(rebuilt, lines[i + 1]);
  }
}

TEST(Report, EmissionIdempotent) {
  const BinnedReport r = golden_report();
  EXPECT_EQ(render_report(r, ReportFormat::Csv), render_report(golden_report(), ReportFormat::Csv));
  EXPECT_EQ(render_report(r, ReportFormat::Json), render_report(r, ReportFormat::Json));
  EXPECT_EQ(nlohmann::ordered_json::parse(render_report(r, ReportFormat::Json)), report_json(r));
  EXPECT_THROW(parse_report_format("xml"), Error);
}

TEST(Curve, AnalyticColumnAndEmpiricalAgreement) {
  const std::vector<double> speeds{0.1, 0.25, 0.5, 1.0, 2.0, 3.5};
  const auto curve = std_vs_speed_curve(NoiseModel(0.01), speeds, 20000, 4);
  ASSERT_EQ(curve.size(), speeds.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    EXPECT_NEAR(curve[i].analytic_std_deg, 0.01 / speeds[i] * kDegPerRad, 1e-12);
    EXPECT_NEAR(curve[i].empirical_std_deg, curve[i].analytic_std_deg, 0.05 * curve[i].analytic_std_deg);
    if (i) {
      EXPECT_LT(curve[i].empirical_std_deg, curve[i - 1].empirical_std_deg);
      EXPECT_LT(curve[i].analytic_std_deg, curve[i - 1].analytic_std_deg);
    }
  }
  const auto again = std_vs_speed_curve(NoiseModel(0.01), speeds, 20000, 4);
  EXPECT_EQ(curve_csv(curve), curve_csv(again));
  EXPECT_EQ(curve_csv(curve).substr(0, 39), "speed,empirical_std_deg,analytic_std_de");
}

TEST(Curve, InvalidInputs) {
  const std::vector<double> speeds{1.0};
  EXPECT_THROW(std_vs_speed_curve(NoiseModel(0.01), speeds, 9999, 0), Error);
  const std::vector<double> zero{0.0};
  EXPECT_THROW(std_vs_speed_curve(NoiseModel(0.01), zero, 10000, 0), Error);
}
