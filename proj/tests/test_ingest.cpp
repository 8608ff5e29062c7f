#include <cmath>

#include <gtest/gtest.h>

#include "ghl/data/ingest.hpp"
#include "ghl/rng.hpp"

using namespace ghl;

namespace {

const std::string kData = GHL_TEST_DATA;

/// Straight line at `speed` along `yaw_deg`, poses at 20 Hz, GNSS at 10 Hz
/// offset by 10 ms, over [0, seconds].
RecordedTrack straight(double yaw_deg, double speed, double seconds, bool with_track) {
  RecordedTrack tr;
  const double c = std::cos(yaw_deg * kRadPerDeg), s = std::sin(yaw_deg * kRadPerDeg);
  for (int i = 0; i * 0.05 <= seconds + 1e-12; ++i) {
    const double t = i * 0.05;
    tr.ground_truth.push_back({t, speed * t * c, speed * t * s, yaw_deg});
  }
  for (int i = 0; i * 0.1 + 0.01 <= seconds; ++i) {
    const double t = i * 0.1 + 0.01;
    GnssRecord g{t, speed * t * c, speed * t * s, std::nullopt, std::nullopt};
    if (with_track) {
      g.speed = speed;
      g.course_deg = yaw_deg;
    }
    tr.gnss.push_back(g);
  }
  return tr;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::Io;
}

}  // namespace

TEST(HeadingFromTrack, Examples) {
  const VelocityNE a = heading_from_track(1.0, 0.0);
  EXPECT_NEAR(a.north(), 1.0, 1e-12);
  EXPECT_NEAR(a.east(), 0.0, 1e-12);
  const VelocityNE b = heading_from_track(2.0, 90.0);
  EXPECT_NEAR(b.north(), 0.0, 1e-12);
  EXPECT_NEAR(b.east(), 2.0, 1e-12);
  EXPECT_EQ(code_of([] { heading_from_track(-1.0, 0.0); }), ErrorCode::InvalidConfig);
}

TEST(HeadingFromTrack, RoundTrip) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double speed = rng.uniform(0.05, 20.0);
    const double course = rng.uniform(0.0, 360.0);
    const VelocityNE v = heading_from_track(speed, course);
    EXPECT_NEAR(angle_diff_deg(model_based_heading(v).heading_deg, course), 0.0, 1e-9);
    EXPECT_NEAR(horizontal_speed(v), speed, 1e-12);
  }
}

TEST(Ingest, StraightLineBothSources) {
  for (auto source : {VelocitySource::Track, VelocitySource::Fixes, VelocitySource::Auto}) {
    IngestConfig cfg;
    cfg.velocity_source = source;
    const IngestResult r = ingest_recorded(straight(30.0, 1.0, 10.0, source != VelocitySource::Fixes), cfg);
    // GNSS spans [0.01, 9.91]: grid ticks 1..99.
    EXPECT_EQ(r.stats.grid_instants, 99u);
    EXPECT_EQ(r.stats.paired, 99u);
    ASSERT_EQ(r.samples.size(), 99u);
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
      const auto& s = r.samples[i];
      EXPECT_NEAR(s.timestamp, 0.1 * static_cast<double>(i + 1), 1e-12);
      EXPECT_NEAR(s.true_heading_deg, 30.0, 1e-12);
      EXPECT_NEAR(s.true_speed, 1.0, 1e-9);
      EXPECT_NEAR(model_based_heading(s.measured).heading_deg, 30.0, 1e-9);
      EXPECT_NEAR(horizontal_speed(s.measured), 1.0, 1e-9);
    }
  }
}

TEST(Ingest, HeadingOutsideFilterDropped) {
  const IngestResult r = ingest_recorded(straight(120.0, 1.0, 10.0, true));
  EXPECT_TRUE(r.samples.empty());
  EXPECT_EQ(r.stats.out_of_heading_range, r.stats.paired);

  IngestConfig wide;
  wide.heading_max_deg = 180.0;
  EXPECT_EQ(ingest_recorded(straight(120.0, 1.0, 10.0, true), wide).samples.size(), 99u);
}

TEST(Ingest, FilterBoundsInclusive) {
  EXPECT_EQ(ingest_recorded(straight(90.0, 1.0, 2.0, true)).samples.size(), 19u);
  EXPECT_EQ(ingest_recorded(straight(0.0, 1.0, 2.0, true)).samples.size(), 19u);
}

TEST(Ingest, StationaryDropped) {
  const IngestResult r = ingest_recorded(straight(45.0, 0.0, 5.0, true));
  EXPECT_TRUE(r.samples.empty());
  EXPECT_EQ(r.stats.stationary, r.stats.paired);
}

TEST(Ingest, TrackSourceWithoutTrackSkipsEpochs) {
  IngestConfig cfg;
  cfg.velocity_source = VelocitySource::Track;
  EXPECT_EQ(code_of([&] { ingest_recorded(straight(30.0, 1.0, 10.0, false), cfg); }), ErrorCode::SparseStream);
}

TEST(Ingest, NoOverlap) {
  RecordedTrack tr = straight(30.0, 1.0, 5.0, true);
  for (auto& g : tr.gnss) g.t += 100.0;
  EXPECT_EQ(code_of([&] { ingest_recorded(tr); }), ErrorCode::NoOverlap);
  RecordedTrack empty = straight(30.0, 1.0, 5.0, true);
  empty.gnss.clear();
  EXPECT_EQ(code_of([&] { ingest_recorded(empty); }), ErrorCode::NoOverlap);
}

TEST(Ingest, SparseStream) {
  RecordedTrack tr = straight(30.0, 1.0, 10.0, true);
  std::vector<GnssRecord> sparse;
  for (std::size_t i = 0; i < tr.gnss.size(); i += 3) sparse.push_back(tr.gnss[i]);
  tr.gnss = sparse;
  EXPECT_EQ(code_of([&] { ingest_recorded(tr); }), ErrorCode::SparseStream);
}

TEST(Ingest, InvalidInputs) {
  RecordedTrack tr = straight(30.0, 1.0, 5.0, true);
  std::swap(tr.ground_truth[3], tr.ground_truth[4]);
  EXPECT_EQ(code_of([&] { ingest_recorded(tr); }), ErrorCode::InvalidConfig);
  IngestConfig cfg;
  cfg.rate_hz = 0.0;
  EXPECT_EQ(code_of([&] { ingest_recorded(straight(30.0, 1.0, 5.0, true), cfg); }), ErrorCode::InvalidConfig);
  cfg = {};
  cfg.heading_min_deg = 50.0;
  cfg.heading_max_deg = 40.0;
  EXPECT_EQ(code_of([&] { ingest_recorded(straight(30.0, 1.0, 5.0, true), cfg); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(parse_velocity_source("fixes"), VelocitySource::Fixes);
  EXPECT_EQ(code_of([] { parse_velocity_source("doppler"); }), ErrorCode::InvalidConfig);
}

TEST(Nclt, ParsesAndSkipsBadRows) {
  const std::string gt =
      "1000000,0,0,0,0,0,0.5\n"
      "1100000,nan,0,0,0,0,0.5\n"
      "950000,1,0,0,0,0,0.5\n"
      "1200000,2,1,0,0,0,0.5\n";
  const auto poses = parse_nclt_ground_truth(gt);
  ASSERT_EQ(poses.size(), 2u);
  EXPECT_DOUBLE_EQ(poses[1].t, 1.2);
  EXPECT_DOUBLE_EQ(poses[1].north, 2.0);
  EXPECT_DOUBLE_EQ(poses[1].east, 1.0);
  EXPECT_NEAR(poses[1].yaw_deg, 0.5 * kDegPerRad, 1e-12);

  const std::string gps =
      "utime,mode,num_satss,lat,lng,alt,track,speed\n"
      "1000000,3,8,0.7,-1.4,270,0.1,1.5\n"
      "1100000,3,8,0.7000001,-1.4,270,nan,nan\n";
  const auto fixes = parse_nclt_gps(gps);
  ASSERT_EQ(fixes.size(), 2u);
  EXPECT_EQ(fixes[0].north, 0.0);
  EXPECT_TRUE(fixes[0].has_track());
  EXPECT_NEAR(*fixes[0].course_deg, 0.1 * kDegPerRad, 1e-12);
  EXPECT_FALSE(fixes[1].has_track());
  EXPECT_NEAR(fixes[1].north, 6378137.0 * 1e-7, 1e-6);
  EXPECT_NEAR(fixes[1].east, 0.0, 1e-9);

  EXPECT_EQ(code_of([] { parse_nclt_ground_truth("a,b,c\n"); }), ErrorCode::SchemaMismatch);
  EXPECT_EQ(code_of([] { parse_nclt_gps("1,2\n"); }), ErrorCode::SchemaMismatch);
}

TEST(Nclt, FixtureCount) {
  const RecordedTrack tr = load_nclt(kData + "/nclt_fixture_groundtruth.csv", kData + "/nclt_fixture_gps.csv");
  const IngestResult r = ingest_recorded(tr);
  EXPECT_EQ(r.stats.grid_instants, 599u);
  EXPECT_EQ(r.stats.paired, 579u);
  ASSERT_EQ(r.samples.size(), 379u);
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    const auto& s = r.samples[i];
    EXPECT_GE(s.true_heading_deg, 0.0);
    EXPECT_LE(s.true_heading_deg, 90.0);
    EXPECT_GT(s.true_speed, 0.0);
    const double ticks = s.timestamp * 10.0;
    EXPECT_NEAR(ticks, std::round(ticks), 1e-6);
    if (i) {
      EXPECT_GT(s.timestamp, r.samples[i - 1].timestamp);
    }
  }
}

TEST(Nclt, MissingFileIsIo) {
  EXPECT_EQ(code_of([] { load_nclt(kData + "/absent.csv", kData + "/nclt_fixture_gps.csv"); }), ErrorCode::Io);
}
