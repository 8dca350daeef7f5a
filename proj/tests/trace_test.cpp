#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "farmsim/engine.hpp"
#include "farmsim/trace.hpp"
#include "test_util.hpp"

namespace farmsim {
namespace {

using testing::Fixture;
using testing::FixturePath;

Scenario TwoTypes() {
  Scenario s;
  s.name = "two-types";
  s.groups.push_back({1, 1.0, 2.0, 1.0, 4, 20});
  for (int id : {3, 7}) {
    JobType t;
    t.id = id;
    t.base_rate = 1.0;
    t.available_groups = {1};
    s.job_types.push_back(t);
  }
  s.Validate();
  return s;
}

TEST(ParseTrace, SortsAndSkipsHeader) {
  std::istringstream in("timestamp_s,type_id\n5.0,3\n1.5,7\n1.5,3\n");
  const ParsedTrace t = ParseTrace(in, {3, 7});
  ASSERT_EQ(t.arrivals.size(), 3u);
  EXPECT_EQ(t.arrivals[0], (TraceArrival{1.5, 7}));
  EXPECT_EQ(t.arrivals[1], (TraceArrival{1.5, 3}));
  EXPECT_EQ(t.arrivals[2], (TraceArrival{5.0, 3}));
  EXPECT_EQ(t.malformed, 0);
}

TEST(ParseTrace, CountsMalformedRows) {
  std::istringstream in("timestamp_s,type_id\n1.0,3\nabc,3\n2.0\n3.0,x\n4.0,7\n");
  const ParsedTrace t = ParseTrace(in);
  EXPECT_EQ(t.arrivals.size(), 2u);
  EXPECT_EQ(t.malformed, 3);
  EXPECT_EQ(t.malformed_rows, (std::vector<long>{3, 4, 5}));
}

TEST(ParseTrace, UnknownTypeNamesRow) {
  std::istringstream in("timestamp_s,type_id\n1.0,3\n2.0,9\n");
  try {
    ParseTrace(in, {3, 7});
    FAIL() << "expected TraceError";
  } catch (const TraceError& e) {
    EXPECT_EQ(e.row(), 3);
  }
}

TEST(ParseTrace, EmptyFile) {
  std::istringstream header_only("timestamp_s,type_id\n");
  EXPECT_TRUE(ParseTrace(header_only).arrivals.empty());
  std::istringstream nothing("");
  EXPECT_TRUE(ParseTrace(nothing).arrivals.empty());
}

TEST(ParseTrace, RoundTrip) {
  const std::vector<TraceArrival> a = {{0.25, 3}, {1.0 / 3.0, 7}, {1e5 + 0.1, 3}};
  std::stringstream io;
  WriteTrace(io, a);
  EXPECT_EQ(ParseTrace(io).arrivals, a);
}

TEST(ParseTrace, MissingFile) {
  EXPECT_THROW(LoadTrace("/nonexistent/trace.csv"), ScenarioError);
}

TEST(HourlyRates, UniformHour) {
  std::vector<TraceArrival> a;
  for (int i = 0; i < 7200; ++i) a.push_back({i * 0.5, 3});
  const RateProfile p = HourlyRates(a, {3, 7});
  ASSERT_EQ(p.buckets(), 1);
  EXPECT_DOUBLE_EQ(p.rates[0][0], 2.0);
  EXPECT_DOUBLE_EQ(p.rates[1][0], 0.0);
  EXPECT_DOUBLE_EQ(HourlyRates(a, {3, 7}, 24).MeanRate(0), 2.0 / 24.0);
}

TEST(RateProfile, CsvRoundTrip) {
  const RateProfile p = LoadRateProfile(FixturePath("trace_profile.csv"));
  EXPECT_EQ(p.type_ids, (std::vector<int>{1, 2, 3, 4}));
  EXPECT_EQ(p.buckets(), 24);
  EXPECT_DOUBLE_EQ(p.period(), 86400.0);
  std::stringstream io;
  WriteRateProfile(io, p);
  EXPECT_EQ(ReadRateProfile(io), p);
}

TEST(RateProfile, RejectsGaps) {
  std::istringstream in("type_id,hour_index,rate_per_s\n1,0,0.5\n1,2,0.5\n");
  EXPECT_THROW(ReadRateProfile(in), ScenarioError);
}

TEST(Replay, ArrivalsLandInTheirBins) {
  const Scenario s = TwoTypes();
  std::vector<TraceArrival> a;
  for (int i = 0; i < 100; ++i) a.push_back({10.0 * i + 1.0, i % 3 == 0 ? 7 : 3});
  RunOptions o;
  o.arrivals = ReplayFactory(a, 2, 1000.0);
  o.horizon = 2000.0;
  o.warmup = 0.0;
  o.bin_width = 100.0;
  const Metrics m = farmsim::Run(s, o);
  ASSERT_EQ(m.bins.size(), 20u);
  for (const BinMetrics& b : m.bins) {
    EXPECT_EQ(b.types[0].arrivals + b.types[1].arrivals, 10);
  }
  EXPECT_EQ(m.window_counts[1].arrivals, 2 * 34);
}

TEST(Replay, UnknownTypeRejected) {
  RunOptions o;
  o.arrivals = ReplayFactory({{1.0, 99}});
  o.horizon = 10.0;
  EXPECT_THROW(farmsim::Run(TwoTypes(), o), ScenarioError);
}

TEST(Nhpp, CountMatchesRate) {
  RateProfile p;
  p.type_ids = {3, 7};
  p.rates = {{2.0, 0.5}, {0.0, 1.0}};
  const Scenario s = TwoTypes();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    NhppArrivals stream(s, p, seed);
    long first_hour[2] = {0, 0}, second_hour[2] = {0, 0};
    double last = 0.0;
    while (auto a = stream.Next()) {
      EXPECT_GE(a->time, last);
      last = a->time;
      ASSERT_LT(a->time, 2 * kHour);
      (a->time < kHour ? first_hour : second_hour)[a->type]++;
    }
    EXPECT_NEAR(first_hour[0], 7200, 7200 * 0.03);
    EXPECT_EQ(first_hour[1], 0);
    EXPECT_NEAR(second_hour[0], 1800, 1800 * 0.08);
    EXPECT_NEAR(second_hour[1], 3600, 3600 * 0.05);
  }
}

TEST(Nhpp, CyclesRepeatTheProfile) {
  RateProfile p;
  p.type_ids = {3, 7};
  p.rates = {{1.0}, {0.0}};
  NhppArrivals stream(TwoTypes(), p, 4, 3);
  long count = 0;
  double last = 0.0;
  while (auto a = stream.Next()) {
    ++count;
    last = a->time;
  }
  EXPECT_GT(last, 2 * kHour);
  EXPECT_LT(last, 3 * kHour);
  EXPECT_NEAR(count, 3 * 3600, 3 * 3600 * 0.03);
}

TEST(Synthesize, FollowsProfile) {
  const RateProfile p = LoadRateProfile(FixturePath("trace_profile.csv"));
  const std::vector<TraceArrival> a = SynthesizeTrace(p, 7);
  EXPECT_EQ(a, SynthesizeTrace(p, 7));
  const RateProfile back = HourlyRates(a, p.type_ids, 24);
  for (std::size_t j = 0; j < p.type_ids.size(); ++j) {
    for (int h = 0; h < 24; ++h) {
      const double expected = p.rates[j][h] * kHour;
      EXPECT_NEAR(back.rates[j][h] * kHour, expected, 5.0 * std::sqrt(expected) + 1.0);
    }
  }
}

TEST(Fixture, TraceFarmMatchesProfileTypes) {
  const Scenario s = Fixture("trace_farm.json");
  const RateProfile p = LoadRateProfile(FixturePath("trace_profile.csv"));
  ASSERT_EQ(s.job_types.size(), p.type_ids.size());
  for (std::size_t j = 0; j < p.type_ids.size(); ++j) {
    EXPECT_EQ(s.job_types[j].id, p.type_ids[j]);
    EXPECT_NEAR(s.job_types[j].base_rate, p.MeanRate(j), 1e-5);
  }
}

}  // namespace
}  // namespace farmsim
