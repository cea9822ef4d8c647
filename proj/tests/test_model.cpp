#include <gtest/gtest.h>

#include <random>

#include "malstone/model.hpp"
#include "support/oracles.hpp"

using namespace malstone;

namespace {

Timestamp at(int y, unsigned m, unsigned d, unsigned hh = 0, unsigned mm = 0, unsigned ss = 0) {
  return to_timestamp({{y, m, d}, hh, mm, ss});
}

}  // namespace

TEST(Calendar, DaysFromCivilMatchesTimegm) {
  std::mt19937_64 g(1);
  for (int i = 0; i < 20000; ++i) {
    const int y = 1970 + static_cast<int>(g() % 131);
    const unsigned m = 1 + static_cast<unsigned>(g() % 12);
    const unsigned d = 1 + static_cast<unsigned>(g() % days_in_month(y, m));
    ASSERT_EQ(days_from_civil({y, m, d}) * kSecondsPerDay, oracle::libc_timegm(y, static_cast<int>(m), static_cast<int>(d)));
    ASSERT_EQ(civil_from_days(days_from_civil({y, m, d})), (CivilDate{y, m, d}));
  }
}

TEST(Calendar, LeapYears) {
  EXPECT_TRUE(is_leap_year(2000));
  EXPECT_FALSE(is_leap_year(1900));
  EXPECT_TRUE(is_leap_year(2008));
  EXPECT_FALSE(is_leap_year(2009));
  EXPECT_EQ(days_in_month(2008, 2), 29u);
  EXPECT_EQ(days_in_month(2009, 2), 28u);
  EXPECT_FALSE(valid_civil_date({2009, 2, 30}));
  EXPECT_FALSE(valid_civil_date({2009, 13, 1}));
  EXPECT_FALSE(valid_civil_date({2009, 0, 1}));
}

TEST(Timestamp, FormatMatchesStrftime) {
  std::mt19937_64 g(2);
  const std::int64_t hi = oracle::libc_timegm(2100, 12, 31, 23, 59, 59);
  for (int i = 0; i < 10000; ++i) {
    const std::int64_t s = static_cast<std::int64_t>(g() % static_cast<std::uint64_t>(hi));
    const auto text = format_timestamp({s});
    ASSERT_EQ(text, oracle::libc_format(s));
    ASSERT_EQ(parse_timestamp(text), Timestamp{s});
  }
}

TEST(Timestamp, ParseRejectsBadText) {
  EXPECT_FALSE(parse_timestamp("2009-02-30 00:00:00"));
  EXPECT_FALSE(parse_timestamp("2009-01-01 24:00:00"));
  EXPECT_FALSE(parse_timestamp("2009-01-01 00:60:00"));
  EXPECT_FALSE(parse_timestamp("2009-01-01T00:00:00"));
  EXPECT_FALSE(parse_timestamp("2009-01-01 00:00:0"));
  EXPECT_FALSE(parse_timestamp("2009-1-01 00:00:00 "));
  EXPECT_TRUE(parse_timestamp("2008-02-29 23:59:59"));
  EXPECT_EQ(parse_date("2009-01-01"), (CivilDate{2009, 1, 1}));
  EXPECT_FALSE(parse_date("2009-04-31"));
}

TEST(Ids, DecimalRoundTrip) {
  EXPECT_EQ(id_to_string(0), "0");
  EXPECT_EQ(id_from_string("0000000000000000000000017"), Id{17});
  const Id big = kEntityIdLimit - 1;
  EXPECT_EQ(id_to_string(big), std::string(25, '9'));
  EXPECT_EQ(id_from_string(id_to_string(big)), big);
  EXPECT_FALSE(id_from_string("12a"));
  EXPECT_FALSE(id_from_string(""));
}

TEST(IsoWeek, Examples) {
  EXPECT_EQ(iso_week_bucket(at(2009, 1, 1)), (WeekBucket{2009, 1}));
  EXPECT_EQ(iso_week_bucket(at(2005, 1, 1, 12)), (WeekBucket{2004, 53}));
  EXPECT_EQ(iso_week_bucket(at(2008, 12, 29)), (WeekBucket{2009, 1}));
}

TEST(IsoWeek, YearBoundaries) {
  // Last day of December and first days of January for every year in range.
  for (int y = 1970; y <= 2100; ++y) {
    for (Timestamp t : {at(y, 12, 28, 23, 59, 59), at(y, 12, 31, 23, 59, 59), at(y, 1, 1), at(y, 1, 4, 12)}) {
      const auto [oy, ow] = oracle::libc_iso_week(t.seconds);
      ASSERT_EQ(iso_week_bucket(t), (WeekBucket{oy, ow})) << format_timestamp(t);
    }
  }
}

TEST(IsoWeek, RandomDatesAgreeWithLibc) {
  std::mt19937_64 g(20090101);
  const std::int64_t hi = oracle::libc_timegm(2100, 12, 31, 23, 59, 59);
  for (int i = 0; i < 10000; ++i) {
    const std::int64_t s = static_cast<std::int64_t>(g() % static_cast<std::uint64_t>(hi + 1));
    const auto [oy, ow] = oracle::libc_iso_week(s);
    ASSERT_EQ(iso_week_bucket({s}), (WeekBucket{oy, ow})) << oracle::libc_format(s);
  }
}

TEST(IsoWeek, WeeksInYear) {
  for (int y = 1970; y <= 2100; ++y) {
    const auto [oy, ow] = oracle::libc_iso_week(at(y, 12, 28).seconds);
    ASSERT_EQ(oy, y);
    ASSERT_EQ(iso_weeks_in_year(y), ow);
  }
  EXPECT_TRUE(valid_bucket({2004, 53}));
  EXPECT_FALSE(valid_bucket({2005, 53}));
  EXPECT_FALSE(valid_bucket({2009, 0}));
}

TEST(BucketOrder, Examples) {
  EXPECT_TRUE(bucket_precedes({2008, 52}, {2009, 1}));
  EXPECT_FALSE(bucket_precedes({2009, 1}, {2009, 1}));
  EXPECT_TRUE(bucket_precedes({2004, 53}, {2005, 1}));
}

TEST(BucketOrder, StrictTotalOrderAndChronological) {
  std::vector<WeekBucket> all;
  for (int y = 2003; y <= 2010; ++y)
    for (int w = 1; w <= iso_weeks_in_year(y); ++w) all.push_back({y, w});
  for (const auto& a : all) {
    ASSERT_FALSE(bucket_precedes(a, a));
    for (const auto& b : all) {
      const bool ab = bucket_precedes(a, b), ba = bucket_precedes(b, a);
      if (a == b) continue;
      ASSERT_NE(ab, ba);
    }
  }
  for (std::size_t i = 0; i + 2 < all.size(); ++i) {
    ASSERT_TRUE(bucket_precedes(all[i], all[i + 1]));
    ASSERT_TRUE(bucket_precedes(all[i], all[i + 2]));  // transitive chain
  }
  // Bucket of later instants never precedes bucket of earlier ones.
  std::mt19937_64 g(5);
  for (int i = 0; i < 5000; ++i) {
    const std::int64_t a = static_cast<std::int64_t>(g() % 2'000'000'000), b = static_cast<std::int64_t>(g() % 2'000'000'000);
    if (a <= b) ASSERT_FALSE(bucket_precedes(iso_week_bucket({b}), iso_week_bucket({a})));
  }
}

TEST(Window, ClosedInterval) {
  const Window w{at(2009, 1, 1), at(2009, 1, 31)};
  EXPECT_TRUE(w.contains(at(2009, 1, 1)));
  EXPECT_TRUE(w.contains(at(2009, 1, 31)));
  EXPECT_FALSE(w.contains(at(2009, 1, 31) + 1));
  EXPECT_FALSE(w.contains(at(2008, 12, 31, 23, 59, 59)));
}

TEST(Validators, SeriesAndScore) {
  SpmSeries good{3, {{{2009, 1}, 1, 1, 1.0}, {{2009, 2}, 2, 1, 0.5}}};
  EXPECT_TRUE(check_series(good).empty());
  SpmSeries out_of_order{3, {{{2009, 2}, 1, 1, 1.0}, {{2009, 1}, 2, 1, 0.5}}};
  EXPECT_FALSE(check_series(out_of_order).empty());
  SpmSeries shrinking{3, {{{2009, 1}, 2, 1, 0.5}, {{2009, 2}, 1, 1, 1.0}}};
  EXPECT_FALSE(check_series(shrinking).empty());
  SpmSeries wrong_rho{3, {{{2009, 1}, 2, 1, 0.75}}};
  EXPECT_FALSE(check_series(wrong_rho).empty());
  EXPECT_TRUE(check_score({3, 4, 1, 0.25}).empty());
  EXPECT_FALSE(check_score({3, 4, 5, 1.25}).empty());
  EXPECT_FALSE(check_score({3, 0, 0, 0.0}).empty());
}

TEST(Config, ValidateExamples) {
  GenConfig cfg;
  cfg.nodes = 2;
  cfg.records_per_node = 1000;
  EXPECT_TRUE(validate_config(cfg).empty());

  auto c2 = cfg;
  c2.marked_sites = c2.total_sites + 1;
  auto v = validate_config(c2);
  ASSERT_FALSE(v.empty());
  EXPECT_NE(std::find(v.begin(), v.end(), "marked_sites exceeds total_sites"), v.end());

  auto c3 = cfg;
  c3.p_mark = 1.5;
  v = validate_config(c3);
  EXPECT_NE(std::find(v.begin(), v.end(), "p_mark outside [0,1]"), v.end());

  auto c4 = cfg;
  c4.nodes = 0;
  c4.alpha = 1.0;
  c4.events_min = 0;
  EXPECT_GE(validate_config(c4).size(), 3u);
}

TEST(Config, Presets) {
  auto desk = preset_config("desk-10M");
  ASSERT_TRUE(desk);
  EXPECT_EQ(desk->nodes, 4u);
  EXPECT_EQ(desk->records_per_node, 2'500'000u);
  EXPECT_EQ(desk->total_records(), 10'000'000u);
  EXPECT_FALSE(preset_requires_force("desk-10M"));
  EXPECT_TRUE(validate_config(*desk).empty());

  auto a10 = preset_config("A-10");
  ASSERT_TRUE(a10);
  EXPECT_EQ(a10->total_records(), 10'000'000'000ULL);
  EXPECT_EQ(a10->total_records() * 100, 1'000'000'000'000ULL);
  EXPECT_TRUE(preset_requires_force("A-10"));
  EXPECT_EQ(preset_config("B-1000")->total_records(), 1'000'000'000'000ULL);
  EXPECT_FALSE(preset_config("C-1"));
  for (const auto& name : preset_names()) EXPECT_TRUE(validate_config(*preset_config(name)).empty()) << name;
}
