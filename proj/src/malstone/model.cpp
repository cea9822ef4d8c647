#include "malstone/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

namespace malstone {

std::string id_to_string(Id v) {
  if (v == 0) return "0";
  std::array<char, 40> buf{};
  std::size_t pos = buf.size();
  while (v != 0) {
    buf[--pos] = static_cast<char>('0' + static_cast<int>(v % 10));
    v /= 10;
  }
  return std::string(buf.data() + pos, buf.size() - pos);
}

std::optional<Id> id_from_string(std::string_view digits) {
  if (digits.empty() || digits.size() > 38) return std::nullopt;
  Id v = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + static_cast<unsigned>(c - '0');
  }
  return v;
}

Id pow10_id(unsigned n) {
  Id v = 1;
  for (unsigned i = 0; i < n; ++i) v *= 10;
  return v;
}

// Howard Hinnant's civil calendar algorithms.
std::int64_t days_from_civil(CivilDate d) {
  std::int64_t y = d.year;
  const unsigned m = d.month;
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d.day - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return {static_cast<int>(y + (m <= 2)), m, d};
}

bool is_leap_year(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

unsigned days_in_month(int y, unsigned m) {
  static constexpr std::array<unsigned, 12> kDays = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m < 1 || m > 12) return 0;
  return m == 2 && is_leap_year(y) ? 29 : kDays[m - 1];
}

bool valid_civil_date(CivilDate d) {
  return d.month >= 1 && d.month <= 12 && d.day >= 1 && d.day <= days_in_month(d.year, d.month);
}

Timestamp to_timestamp(const CivilTime& t) {
  return {days_from_civil(t.date) * kSecondsPerDay + t.hour * 3600 + t.minute * 60 + t.second};
}

CivilTime to_civil(Timestamp t) {
  std::int64_t days = t.seconds / kSecondsPerDay;
  std::int64_t rem = t.seconds % kSecondsPerDay;
  if (rem < 0) {
    rem += kSecondsPerDay;
    --days;
  }
  CivilTime out;
  out.date = civil_from_days(days);
  out.hour = static_cast<unsigned>(rem / 3600);
  out.minute = static_cast<unsigned>(rem % 3600 / 60);
  out.second = static_cast<unsigned>(rem % 60);
  return out;
}

std::string format_timestamp(Timestamp t) {
  const CivilTime c = to_civil(t);
  if (c.date.year < 0 || c.date.year > 9999)
    throw ContractViolation("timestamp year outside 0000..9999");
  char buf[24];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02u:%02u:%02u", c.date.year, c.date.month, c.date.day,
                c.hour, c.minute, c.second);
  return buf;
}

namespace {

bool parse_fixed(std::string_view s, unsigned& out) {
  unsigned v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    v = v * 10 + static_cast<unsigned>(c - '0');
  }
  out = v;
  return true;
}

}  // namespace

std::optional<CivilDate> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  unsigned y, m, d;
  if (!parse_fixed(s.substr(0, 4), y) || !parse_fixed(s.substr(5, 2), m) || !parse_fixed(s.substr(8, 2), d))
    return std::nullopt;
  CivilDate date{static_cast<int>(y), m, d};
  if (!valid_civil_date(date)) return std::nullopt;
  return date;
}

std::string format_date(CivilDate d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", d.year, d.month, d.day);
  return buf;
}

std::optional<Timestamp> parse_timestamp(std::string_view s) {
  if (s.size() != 19 || s[10] != ' ' || s[13] != ':' || s[16] != ':') return std::nullopt;
  auto date = parse_date(s.substr(0, 10));
  if (!date) return std::nullopt;
  unsigned h, mi, se;
  if (!parse_fixed(s.substr(11, 2), h) || !parse_fixed(s.substr(14, 2), mi) || !parse_fixed(s.substr(17, 2), se))
    return std::nullopt;
  if (h > 23 || mi > 59 || se > 59) return std::nullopt;
  return to_timestamp({*date, h, mi, se});
}

namespace {

// 0 = Monday .. 6 = Sunday. 1970-01-01 was a Thursday.
int iso_weekday_index(std::int64_t days) {
  std::int64_t w = (days + 3) % 7;
  if (w < 0) w += 7;
  return static_cast<int>(w);
}

}  // namespace

WeekBucket iso_week_bucket(Timestamp t) {
  std::int64_t days = t.seconds / kSecondsPerDay;
  if (t.seconds % kSecondsPerDay < 0) --days;
  // The ISO year is the calendar year of this week's Thursday.
  const std::int64_t thursday = days - iso_weekday_index(days) + 3;
  const CivilDate th = civil_from_days(thursday);
  const std::int64_t jan1 = days_from_civil({th.year, 1, 1});
  return {th.year, static_cast<std::int32_t>((thursday - jan1) / 7 + 1)};
}

bool bucket_precedes(const WeekBucket& a, const WeekBucket& b) {
  if (a.iso_year != b.iso_year) return a.iso_year < b.iso_year;
  return a.iso_week < b.iso_week;
}

int iso_weeks_in_year(int iso_year) {
  // Dec 28 always falls in the last ISO week of its year.
  return iso_week_bucket({days_from_civil({iso_year, 12, 28}) * kSecondsPerDay}).iso_week;
}

bool valid_bucket(const WeekBucket& b) {
  return b.iso_week >= 1 && b.iso_week <= iso_weeks_in_year(b.iso_year);
}

std::vector<std::string> check_series(const SpmSeries& s) {
  std::vector<std::string> out;
  const std::string site = id_to_string(s.site_id);
  if (s.entries.empty()) out.push_back("site " + site + ": empty series");
  for (std::size_t i = 0; i < s.entries.size(); ++i) {
    const auto& e = s.entries[i];
    const std::string where = "site " + site + " entry " + std::to_string(i) + ": ";
    if (!valid_bucket(e.bucket)) out.push_back(where + "invalid ISO week");
    if (i > 0) {
      const auto& p = s.entries[i - 1];
      if (!bucket_precedes(p.bucket, e.bucket)) out.push_back(where + "buckets not strictly increasing");
      if (e.cum_events <= p.cum_events) out.push_back(where + "cum_events not strictly increasing");
      if (e.cum_marked < p.cum_marked) out.push_back(where + "cum_marked decreased");
    } else if (e.cum_events == 0) {
      out.push_back(where + "zero events");
    }
    if (e.cum_marked > e.cum_events) out.push_back(where + "cum_marked exceeds cum_events");
    if (e.cum_events > 0 &&
        e.rho != static_cast<double>(e.cum_marked) / static_cast<double>(e.cum_events))
      out.push_back(where + "rho != cum_marked / cum_events");
    if (!(e.rho >= 0.0 && e.rho <= 1.0)) out.push_back(where + "rho outside [0,1]");
  }
  return out;
}

std::vector<std::string> check_score(const SpmScore& s) {
  std::vector<std::string> out;
  const std::string where = "site " + id_to_string(s.site_id) + ": ";
  if (s.events == 0) out.push_back(where + "zero events");
  if (s.marked > s.events) out.push_back(where + "marked exceeds events");
  if (s.events > 0 && s.rho != static_cast<double>(s.marked) / static_cast<double>(s.events))
    out.push_back(where + "rho != marked / events");
  if (!(s.rho >= 0.0 && s.rho <= 1.0)) out.push_back(where + "rho outside [0,1]");
  return out;
}

Timestamp GenConfig::period_begin() const { return {days_from_civil(period_start) * kSecondsPerDay}; }

Timestamp GenConfig::period_last() const {
  return period_begin() + (std::int64_t{period_days} * kSecondsPerDay - 1);
}

std::vector<std::string> validate_config(const GenConfig& c) {
  std::vector<std::string> v;
  if (c.nodes < 1) v.emplace_back("nodes must be at least 1");
  if (c.nodes > 10'000) v.emplace_back("nodes exceeds 10000 (node-XXXX layout)");
  if (c.records_per_node < 1) v.emplace_back("records_per_node must be at least 1");
  if (c.total_sites < 1) v.emplace_back("total_sites must be at least 1");
  if (c.marked_sites > c.total_sites) v.emplace_back("marked_sites exceeds total_sites");
  if (c.entities < 1) v.emplace_back("entities must be at least 1");
  if (c.period_days < 1) v.emplace_back("period_days must be at least 1");
  if (!valid_civil_date(c.period_start)) v.emplace_back("period_start is not a calendar date");
  if (!(c.p_mark >= 0.0 && c.p_mark <= 1.0)) v.emplace_back("p_mark outside [0,1]");
  if (!(c.background_mark_rate >= 0.0 && c.background_mark_rate <= 1.0))
    v.emplace_back("background_mark_rate outside [0,1]");
  if (!(c.alpha > 1.0) || !std::isfinite(c.alpha)) v.emplace_back("alpha must be greater than 1");
  if (c.events_min < 1) v.emplace_back("events_min must be at least 1");
  if (c.events_min > c.events_max) v.emplace_back("events_min exceeds events_max");
  if (valid_civil_date(c.period_start)) {
    const CivilDate last_mark = to_civil(c.period_last() + c.delay_seconds()).date;
    if (c.period_start.year < 0 || last_mark.year > 9999)
      v.emplace_back("period (plus delay) must lie within years 0000..9999");
  }
  return v;
}

namespace {

struct Preset {
  const char* name;
  std::uint32_t nodes;
  std::uint64_t records_per_node;
  bool needs_force;
};

// Large scales hold 500M records per node and grow the node count.
constexpr std::array<Preset, 7> kPresets = {{
    {"desk-10M", 4, 2'500'000, false},
    {"A-10", 20, 500'000'000, true},
    {"A-100", 200, 500'000'000, true},
    {"A-1000", 2000, 500'000'000, true},
    {"B-10", 20, 500'000'000, true},
    {"B-100", 200, 500'000'000, true},
    {"B-1000", 2000, 500'000'000, true},
}};

const Preset* find_preset(std::string_view name) {
  for (const auto& p : kPresets)
    if (name == p.name) return &p;
  return nullptr;
}

}  // namespace

std::optional<GenConfig> preset_config(std::string_view name) {
  const Preset* p = find_preset(name);
  if (!p) return std::nullopt;
  GenConfig c;
  c.nodes = p->nodes;
  c.records_per_node = p->records_per_node;
  const std::uint64_t records = c.total_records();
  c.total_sites = records / 10;
  c.marked_sites = c.total_sites / 100;
  c.entities = records;
  return c;
}

bool preset_requires_force(std::string_view name) {
  const Preset* p = find_preset(name);
  return p && p->needs_force;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& p : kPresets) out.emplace_back(p.name);
  return out;
}

}  // namespace malstone
