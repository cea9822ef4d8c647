// Domain types shared by the generator, the codec and the engines.
#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace malstone {

// Site and entity ids are up to 25 decimal digits wide, beyond uint64.
using Id = unsigned __int128;

struct IdHash {
  std::size_t operator()(Id v) const noexcept {
    // splitmix64 finalizer over the folded halves
    std::uint64_t x = static_cast<std::uint64_t>(v) ^ (static_cast<std::uint64_t>(v >> 64) * 0x9e3779b97f4a7c15ULL);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return static_cast<std::size_t>(x);
  }
};

std::string id_to_string(Id v);
std::optional<Id> id_from_string(std::string_view digits);

inline constexpr std::int64_t kSecondsPerDay = 86400;

/// UTC instant with one-second resolution, counted from 1970-01-01 00:00:00.
struct Timestamp {
  std::int64_t seconds = 0;

  friend constexpr auto operator<=>(Timestamp, Timestamp) = default;
  constexpr Timestamp operator+(std::int64_t s) const { return {seconds + s}; }
};

struct CivilDate {
  int year = 1970;
  unsigned month = 1;  // 1..12
  unsigned day = 1;    // 1..31

  friend constexpr auto operator<=>(const CivilDate&, const CivilDate&) = default;
};

struct CivilTime {
  CivilDate date;
  unsigned hour = 0, minute = 0, second = 0;
};

// Proleptic Gregorian conversions.
std::int64_t days_from_civil(CivilDate d);
CivilDate civil_from_days(std::int64_t days);
bool is_leap_year(int y);
unsigned days_in_month(int y, unsigned m);
bool valid_civil_date(CivilDate d);

Timestamp to_timestamp(const CivilTime& t);
CivilTime to_civil(Timestamp t);

/// "YYYY-MM-DD HH:MM:SS"; years outside 0..9999 are a contract violation.
std::string format_timestamp(Timestamp t);
/// Parses exactly 19 chars of "YYYY-MM-DD HH:MM:SS"; nullopt on any syntax or calendar error.
std::optional<Timestamp> parse_timestamp(std::string_view text);
/// Parses "YYYY-MM-DD".
std::optional<CivilDate> parse_date(std::string_view text);
std::string format_date(CivilDate d);

/// ISO-8601 week-numbering (year, week).
struct WeekBucket {
  std::int32_t iso_year = 0;
  std::int32_t iso_week = 1;

  friend constexpr auto operator<=>(const WeekBucket&, const WeekBucket&) = default;
};

WeekBucket iso_week_bucket(Timestamp t);
bool bucket_precedes(const WeekBucket& a, const WeekBucket& b);
/// Number of ISO weeks (52 or 53) in an ISO week-numbering year.
int iso_weeks_in_year(int iso_year);
bool valid_bucket(const WeekBucket& b);

/// Closed interval [start, end].
struct Window {
  Timestamp start;
  Timestamp end;

  bool contains(Timestamp t) const { return start <= t && t <= end; }
};

struct EventRecord {
  std::uint64_t event_node = 0;  // 48-bit node hash
  std::uint64_t event_seq = 0;   // < 10^18
  Timestamp timestamp;
  Id site_id = 0;    // < 10^20
  Id entity_id = 0;  // < 10^25
  bool mark_flag = false;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

inline constexpr std::uint64_t kMaxEventNode = (std::uint64_t{1} << 48) - 1;
inline constexpr std::uint64_t kEventSeqLimit = 1'000'000'000'000'000'000ULL;  // 10^18
Id pow10_id(unsigned n);
inline const Id kSiteIdLimit = pow10_id(20);
inline const Id kEntityIdLimit = pow10_id(25);

struct SpmEntry {
  WeekBucket bucket;
  std::uint64_t cum_events = 0;
  std::uint64_t cum_marked = 0;
  double rho = 0.0;

  friend bool operator==(const SpmEntry&, const SpmEntry&) = default;
};

struct SpmSeries {
  Id site_id = 0;
  std::vector<SpmEntry> entries;

  friend bool operator==(const SpmSeries&, const SpmSeries&) = default;
};

struct SpmScore {
  Id site_id = 0;
  std::uint64_t events = 0;
  std::uint64_t marked = 0;
  double rho = 0.0;

  friend bool operator==(const SpmScore&, const SpmScore&) = default;
};

/// Empty when the series satisfies ordering, monotonicity and ratio invariants.
std::vector<std::string> check_series(const SpmSeries& s);
std::vector<std::string> check_score(const SpmScore& s);

struct GenConfig {
  std::uint32_t nodes = 1;
  std::uint64_t records_per_node = 1000;
  std::uint64_t total_sites = 10'000;
  std::uint64_t marked_sites = 100;
  std::uint64_t entities = 100'000;
  CivilDate period_start{2009, 1, 1};
  std::uint32_t period_days = 365;
  double p_mark = 0.70;
  std::uint32_t delay_days = 7;
  double alpha = 2.0;
  std::uint64_t events_min = 50;
  std::uint64_t events_max = 10'000'000;
  double background_mark_rate = 0.0;
  std::uint64_t master_seed = 0;

  Timestamp period_begin() const;
  /// Last representable second of the period.
  Timestamp period_last() const;
  std::int64_t delay_seconds() const { return std::int64_t{delay_days} * kSecondsPerDay; }
  std::uint64_t total_records() const { return std::uint64_t{nodes} * records_per_node; }

  friend bool operator==(const GenConfig&, const GenConfig&) = default;
};

std::vector<std::string> validate_config(const GenConfig& cfg);

/// Named scale presets: desk-10M plus A-10 .. B-1000.
std::optional<GenConfig> preset_config(std::string_view name);
/// Presets whose size is beyond a single workstation.
bool preset_requires_force(std::string_view name);
std::vector<std::string> preset_names();

// Errors raised across the library. The C API maps each to a status code.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ContractViolation : Error {
  using Error::Error;
};
struct ConfigInvalid : Error {
  using Error::Error;
};
struct ConfigInfeasible : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};
struct MalformedRecord : Error {
  using Error::Error;
};
struct TruncatedFile : Error {
  using Error::Error;
};
struct VerificationFailed : Error {
  using Error::Error;
};

}  // namespace malstone
