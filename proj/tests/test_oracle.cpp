#include <gtest/gtest.h>

#include <map>
#include <random>

#include "malstone/oracle.hpp"
#include "support/oracles.hpp"

using namespace malstone;

namespace {

constexpr std::int64_t kDay = kSecondsPerDay;
const Timestamp kT0{1'230'768'000};  // 2009-01-01 00:00:00

EventRecord visit(Id site, Id entity, std::int64_t day, std::uint64_t seq = 0) {
  return {1, seq, kT0 + day * kDay, site, entity, false};
}

struct Synthetic {
  std::vector<EventRecord> recs;
  MarkTable marks;
  std::map<Id, std::int64_t> plain_marks;
};

// 10,000 visits over 50 sites and 500 entities spread across 120 days; about 40% of entities marked.
Synthetic synthetic(std::uint64_t seed) {
  std::mt19937_64 g(seed);
  Synthetic s;
  for (Id e = 0; e < 500; ++e) {
    if (g() % 5 < 2) {
      const Timestamp m = kT0 + static_cast<std::int64_t>(g() % (120 * kDay));
      s.marks.set(e, m);
      s.plain_marks[e] = m.seconds;
    }
  }
  for (std::uint64_t i = 0; i < 10'000; ++i)
    s.recs.push_back({1, i, kT0 + static_cast<std::int64_t>(g() % (120 * kDay)), g() % 50, g() % 500, false});
  return s;
}

}  // namespace

TEST(Oracle, SingleMarkedVisitorGivesOne) {
  MarkTable marks;
  marks.set(9, kT0 + 10 * kDay);
  const std::vector<EventRecord> recs{visit(4, 9, 2)};
  const auto out = oracle_entity_spm(recs, marks, {kT0, kT0 + 30 * kDay}, {kT0, kT0 + 30 * kDay});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], (OracleScore{4, 1, 1, 1.0}));
}

TEST(Oracle, VisitAfterMarkIsExcluded) {
  MarkTable marks;
  marks.set(9, kT0 + 10 * kDay);
  const std::vector<EventRecord> only_after{visit(4, 9, 12)};
  EXPECT_TRUE(oracle_entity_spm(only_after, marks, {kT0, kT0 + 30 * kDay}, {kT0, kT0 + 30 * kDay}).empty());
  // A visit at the mark instant is not before the mark.
  const std::vector<EventRecord> at_mark{visit(4, 9, 10)};
  EXPECT_TRUE(oracle_entity_spm(at_mark, marks, {kT0, kT0 + 30 * kDay}, {kT0, kT0 + 30 * kDay}).empty());
}

TEST(Oracle, UnmarkedVisitorsCountInA) {
  MarkTable marks;
  marks.set(1, kT0 + 5 * kDay);
  const std::vector<EventRecord> recs{visit(4, 1, 1), visit(4, 2, 1), visit(4, 2, 3), visit(4, 3, 2)};
  const auto out = oracle_entity_spm(recs, marks, {kT0, kT0 + 30 * kDay}, {kT0, kT0 + 30 * kDay});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].a_size, 3u);
  EXPECT_EQ(out[0].b_size, 1u);
  EXPECT_DOUBLE_EQ(out[0].rho, 1.0 / 3);
}

TEST(Oracle, MatchesBruteForceOnFiveWindowConfigs) {
  const auto s = synthetic(17);
  std::mt19937_64 g(18);
  for (int cfg = 0; cfg < 5; ++cfg) {
    const std::int64_t a = static_cast<std::int64_t>(g() % (60 * kDay)), b = a + static_cast<std::int64_t>(g() % (60 * kDay));
    const std::int64_t c = static_cast<std::int64_t>(g() % (60 * kDay)), d = c + static_cast<std::int64_t>(g() % (90 * kDay));
    const Window exp{kT0 + a, kT0 + b}, mon{kT0 + c, kT0 + d};
    const auto got = oracle_entity_spm(s.recs, s.marks, exp, mon);
    const auto want = oracle::brute_force_spm(s.recs, s.plain_marks, exp.start.seconds, exp.end.seconds,
                                              mon.start.seconds, mon.end.seconds);
    ASSERT_EQ(got.size(), want.size()) << "config " << cfg;
    for (std::size_t i = 0; i < got.size(); ++i) {
      ASSERT_EQ(got[i].site_id, want[i].site);
      ASSERT_EQ(got[i].a_size, want[i].a);
      ASSERT_EQ(got[i].b_size, want[i].b);
      ASSERT_LE(got[i].b_size, got[i].a_size);
      ASSERT_EQ(got[i].rho, double(want[i].b) / double(want[i].a));
    }
  }
}

TEST(Oracle, SeriesMatchesBruteForceAndIsMonotone) {
  const auto s = synthetic(23);
  const Window exp{kT0, kT0 + 60 * kDay};
  const auto ends = weekly_monitor_ends(kT0, kT0 + 120 * kDay);
  const auto series = oracle_entity_spm_series(s.recs, s.marks, exp, ends);
  ASSERT_FALSE(series.empty());
  for (std::size_t k = 0; k < ends.size(); ++k) {
    const auto want = oracle::brute_force_spm(s.recs, s.plain_marks, exp.start.seconds, exp.end.seconds,
                                              kT0.seconds, ends[k].seconds);
    ASSERT_EQ(want.size(), series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
      ASSERT_EQ(series[i].site_id, want[i].site);
      ASSERT_EQ(series[i].a_size, want[i].a);
      ASSERT_EQ(series[i].points[k].monitor_end, ends[k]);
      ASSERT_EQ(series[i].points[k].b_size, want[i].b);
    }
  }
  for (const auto& site : series)
    for (std::size_t k = 1; k < site.points.size(); ++k) ASSERT_LE(site.points[k - 1].rho, site.points[k].rho);
  // Final end covering every mark equals the single-window score.
  const auto full = oracle_entity_spm(s.recs, s.marks, exp, {kT0, ends.back()});
  ASSERT_EQ(full.size(), series.size());
  for (std::size_t i = 0; i < full.size(); ++i) {
    EXPECT_EQ(full[i].b_size, series[i].points.back().b_size);
    EXPECT_EQ(full[i].rho, series[i].points.back().rho);
  }
}

TEST(Oracle, SeriesRejectsUnorderedEnds) {
  const auto s = synthetic(1);
  const std::vector<Timestamp> ends{kT0 + kDay, kT0 + kDay};
  EXPECT_THROW(oracle_entity_spm_series(s.recs, s.marks, {kT0, kT0 + kDay}, ends), ContractViolation);
}

TEST(Oracle, WeeklyEnds) {
  const auto ends = weekly_monitor_ends(kT0, kT0 + 20 * kDay);
  ASSERT_EQ(ends.size(), 3u);
  EXPECT_EQ(ends[0], kT0 + (7 * kDay - 1));
  EXPECT_EQ(ends[1], kT0 + (14 * kDay - 1));
  EXPECT_EQ(ends[2], kT0 + 20 * kDay);
}

TEST(Oracle, CsvLayout) {
  const std::vector<OracleScore> scores{{4, 3, 1, 1.0 / 3}};
  EXPECT_EQ(oracle_csv(scores), "site_id,a_size,b_size,rho\n4,3,1,0.333333\n");
  const std::vector<OracleSeries> series{{4, 2, {{kT0, 0, 0.0}, {kT0 + kDay, 1, 0.5}}}};
  EXPECT_EQ(oracle_series_csv(series),
            "site_id,monitor_end,a_size,b_size,rho\n4,2009-01-01 00:00:00,2,0,0.000000\n4,2009-01-02 00:00:00,2,1,0.500000\n");
}
