#include <cmath>
#include <filesystem>
#include <set>

#include <gtest/gtest.h>

#include "ghl/data/csv.hpp"
#include "ghl/data/split.hpp"
#include "ghl/simgen.hpp"

using namespace ghl;

namespace {

Dataset sample_set(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    const double speed = rng.uniform(0.0, 3.5);
    const double heading = rng.uniform(0.0, 90.0);
    d.push_back({0.1 * static_cast<double>(i), VelocityNE(speed * std::cos(heading * kRadPerDeg), speed * std::sin(heading * kRadPerDeg)), heading, speed});
  }
  return d;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("ghl_test_" + name)).string();
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

TEST(Csv, RoundTripIsExact) {
  const Dataset d = sample_set(500, 1);
  const std::string path = temp_path("roundtrip.csv");
  write_csv(d, describe(d, "S1", "simulative"), path);
  const LoadedDataset back = read_csv(path);
  ASSERT_EQ(back.samples.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(back.samples[i].timestamp, d[i].timestamp);
    EXPECT_EQ(back.samples[i].measured.north(), d[i].measured.north());
    EXPECT_EQ(back.samples[i].measured.east(), d[i].measured.east());
    EXPECT_EQ(back.samples[i].true_heading_deg, d[i].true_heading_deg);
    EXPECT_EQ(back.samples[i].true_speed, d[i].true_speed);
  }
  EXPECT_EQ(back.manifest.label, "S1");
  EXPECT_EQ(back.manifest.sample_count, 500u);
  EXPECT_EQ(to_csv(back.samples), to_csv(d));
  std::filesystem::remove(path);
  std::filesystem::remove(manifest_path(path));
}

TEST(Csv, HeaderOnlyIsEmptyDataset) {
  EXPECT_TRUE(parse_csv(std::string(kCsvHeader) + "\n").empty());
  EXPECT_EQ(to_csv({}), std::string(kCsvHeader) + "\n");
}

TEST(Csv, SchemaErrors) {
  EXPECT_EQ(code_of([] { parse_csv("t,vn,ve,heading,speed\n1,2,3,4,5\n"); }), ErrorCode::SchemaMismatch);
  EXPECT_EQ(code_of([] { parse_csv(""); }), ErrorCode::SchemaMismatch);
  EXPECT_EQ(code_of([] { parse_csv(std::string(kCsvHeader) + "\n1,2,3,4\n"); }), ErrorCode::SchemaMismatch);
  EXPECT_EQ(code_of([] { parse_csv(std::string(kCsvHeader) + "\n1,2,3,4,5,6\n"); }), ErrorCode::SchemaMismatch);
  EXPECT_EQ(code_of([] { parse_csv(std::string(kCsvHeader) + "\n1,x,3,4,5\n"); }), ErrorCode::SchemaMismatch);
  EXPECT_EQ(code_of([] { parse_csv(std::string(kCsvHeader) + "\n1,nan,3,4,5\n"); }), ErrorCode::SchemaMismatch);
}

TEST(Csv, ManifestCountMismatch) {
  const Dataset d = sample_set(10, 2);
  DatasetManifest m = describe(d, "x", "simulative");
  m.sample_count = 11;
  const std::string path = temp_path("mismatch.csv");
  EXPECT_EQ(code_of([&] { write_csv(d, m, path); }), ErrorCode::SchemaMismatch);

  write_csv(d, describe(d, "x", "simulative"), path);
  write_text(path, to_csv(sample_set(9, 2)));
  EXPECT_EQ(code_of([&] { read_csv(path); }), ErrorCode::SchemaMismatch);
  std::filesystem::remove(path);
  std::filesystem::remove(manifest_path(path));
}

TEST(Csv, MissingFileIsIo) {
  EXPECT_EQ(code_of([] { read_csv(temp_path("absent.csv")); }), ErrorCode::Io);
}

TEST(Csv, ManifestDescribesData) {
  SimGridConfig c;
  c.speed_max = 0.3;
  c.heading_step = 45.0;
  c.repeats_per_cell = 2;
  const Dataset d = generate_grid_dataset(c);
  const DatasetManifest m = describe(d, "S1", "simulative");
  EXPECT_EQ(m.sample_count, 4u * 3u * 2u);
  EXPECT_EQ(m.speed_range.first, 0.0);
  EXPECT_DOUBLE_EQ(m.speed_range.second, 0.3);
  EXPECT_EQ(m.heading_range, (std::pair<double, double>{0.0, 90.0}));
  const DatasetManifest back = DatasetManifest::from_json(m.to_json());
  EXPECT_EQ(back.to_json(), m.to_json());
}

TEST(Split, EightyTwenty) {
  const Dataset d = sample_set(10, 3);
  const SplitResult s = split(d, 0.8, 0);
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.val.size(), 2u);
}

TEST(Split, SameSeedSamePartition) {
  const Dataset d = sample_set(100, 4);
  const SplitResult a = split(d, 0.8, 9);
  const SplitResult b = split(d, 0.8, 9);
  EXPECT_EQ(to_csv(a.train), to_csv(b.train));
  EXPECT_EQ(to_csv(a.val), to_csv(b.val));
  EXPECT_NE(to_csv(split(d, 0.8, 10).train), to_csv(a.train));
}

TEST(Split, IsPartition) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(300);
    const double ratio = rng.uniform(0.05, 0.95);
    const Dataset d = sample_set(n, 100 + static_cast<std::uint64_t>(trial));
    const SplitResult s = split(d, ratio, static_cast<std::uint64_t>(trial));
    ASSERT_EQ(s.train.size() + s.val.size(), n);
    EXPECT_EQ(s.train.size(), static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n))));
    std::multiset<double> all, parts;
    for (const auto& x : d) all.insert(x.timestamp);
    for (const auto& x : s.train) parts.insert(x.timestamp);
    for (const auto& x : s.val) parts.insert(x.timestamp);
    EXPECT_EQ(all, parts);
    for (std::size_t i = 1; i < s.train.size(); ++i) EXPECT_LT(s.train[i - 1].timestamp, s.train[i].timestamp);
  }
}

TEST(Split, Errors) {
  const Dataset d = sample_set(10, 6);
  EXPECT_EQ(code_of([&] { split(d, 0.0, 0); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([&] { split(d, 1.0, 0); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { split({}, 0.8, 0); }), ErrorCode::EmptyDataset);
}
