// Independent reference implementations used to check the library.
// Nothing here calls into the code under test except for plain data types.
#pragma once

#include <time.h>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "malstone/model.hpp"
#include "support/files.hpp"

namespace oracle {

// ISO week-year and week from the C library (%G / %V).
inline std::pair<int, int> libc_iso_week(std::int64_t seconds) {
  time_t t = static_cast<time_t>(seconds);
  struct tm tm {};
  gmtime_r(&t, &tm);
  char buf[32];
  strftime(buf, sizeof buf, "%G %V", &tm);
  int y = 0, w = 0;
  std::sscanf(buf, "%d %d", &y, &w);
  return {y, w};
}

inline std::int64_t libc_timegm(int y, int mo, int d, int h = 0, int mi = 0, int s = 0) {
  struct tm tm {};
  tm.tm_year = y - 1900;
  tm.tm_mon = mo - 1;
  tm.tm_mday = d;
  tm.tm_hour = h;
  tm.tm_min = mi;
  tm.tm_sec = s;
  return static_cast<std::int64_t>(timegm(&tm));
}

inline std::string libc_format(std::int64_t seconds) {
  time_t t = static_cast<time_t>(seconds);
  struct tm tm {};
  gmtime_r(&t, &tm);
  char buf[32];
  strftime(buf, sizeof buf, "%Y-%m-%d %H:%M:%S", &tm);
  return buf;
}

// Uniformly random valid record in 1970..2100.
inline malstone::EventRecord random_record(std::mt19937_64& g) {
  using malstone::Id;
  malstone::EventRecord r;
  r.event_node = g() & ((std::uint64_t{1} << 48) - 1);
  r.event_seq = g() % 1'000'000'000'000'000'000ULL;
  const std::int64_t lo = 0, hi = libc_timegm(2100, 12, 31, 23, 59, 59);
  r.timestamp.seconds = lo + static_cast<std::int64_t>(g() % static_cast<std::uint64_t>(hi - lo + 1));
  const Id ten19 = Id{10'000'000'000'000'000'000ULL};
  r.site_id = ((Id{g()} << 64) | g()) % (ten19 * 10);
  r.entity_id = ((Id{g()} << 64) | g()) % (ten19 * 1'000'000);
  r.mark_flag = (g() & 1) != 0;
  return r;
}

struct BruteScore {
  malstone::Id site = 0;
  std::uint64_t a = 0, b = 0;
};

// |A_j| and |B_j| by testing every (site, entity) pair.
inline std::vector<BruteScore> brute_force_spm(const std::vector<malstone::EventRecord>& recs,
                                               const std::map<malstone::Id, std::int64_t>& marks,
                                               std::int64_t exp_lo, std::int64_t exp_hi, std::int64_t mon_lo,
                                               std::int64_t mon_hi) {
  std::set<malstone::Id> sites, entities;
  std::set<std::pair<malstone::Id, malstone::Id>> exposed;
  for (const auto& r : recs) {
    sites.insert(r.site_id);
    entities.insert(r.entity_id);
    const std::int64_t t = r.timestamp.seconds;
    if (t < exp_lo || t > exp_hi) continue;
    auto m = marks.find(r.entity_id);
    if (m != marks.end() && t >= m->second) continue;
    exposed.insert({r.site_id, r.entity_id});
  }
  std::vector<BruteScore> out;
  for (auto s : sites) {
    BruteScore sc{s, 0, 0};
    for (auto e : entities) {
      if (!exposed.count({s, e})) continue;
      ++sc.a;
      auto m = marks.find(e);
      if (m != marks.end() && m->second >= mon_lo && m->second <= mon_hi) ++sc.b;
    }
    if (sc.a > 0) out.push_back(sc);
  }
  return out;
}

}  // namespace oracle
