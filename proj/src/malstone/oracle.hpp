// Entity-set SPM: for a site j, A_j holds the distinct entities that visited j
// inside the exposure window, before their own mark if they have one; B_j
// holds the members of A_j whose mark falls inside the monitor window.
// rho_j = |B_j| / |A_j|. Sites with an empty A_j are omitted.
//
// Unlike the benchmark engines this counts entities, not events, and reads
// mark instants from the generator's mark table instead of record flags.
#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "malstone/dataset.hpp"
#include "malstone/malgen.hpp"
#include "malstone/model.hpp"

namespace malstone {

struct OracleScore {
  Id site_id = 0;
  std::uint64_t a_size = 0;
  std::uint64_t b_size = 0;
  double rho = 0.0;

  friend bool operator==(const OracleScore&, const OracleScore&) = default;
};

struct OraclePoint {
  Timestamp monitor_end;
  std::uint64_t b_size = 0;
  double rho = 0.0;

  friend bool operator==(const OraclePoint&, const OraclePoint&) = default;
};

struct OracleSeries {
  Id site_id = 0;
  std::uint64_t a_size = 0;
  std::vector<OraclePoint> points;

  friend bool operator==(const OracleSeries&, const OracleSeries&) = default;
};

std::vector<OracleScore> oracle_entity_spm(std::span<const EventRecord> records, const MarkTable& marks,
                                           const Window& exposure, const Window& monitor);
std::vector<OracleScore> oracle_entity_spm(const Dataset& ds, const MarkTable& marks, const Window& exposure,
                                           const Window& monitor);

/// Monitor windows are [monitor_start, t] for each t in monitor_ends (strictly
/// ascending); monitor_start defaults to the exposure window's start.
std::vector<OracleSeries> oracle_entity_spm_series(std::span<const EventRecord> records, const MarkTable& marks,
                                                   const Window& exposure, std::span<const Timestamp> monitor_ends,
                                                   std::optional<Timestamp> monitor_start = std::nullopt);
std::vector<OracleSeries> oracle_entity_spm_series(const Dataset& ds, const MarkTable& marks, const Window& exposure,
                                                   std::span<const Timestamp> monitor_ends,
                                                   std::optional<Timestamp> monitor_start = std::nullopt);

/// Weekly monitor ends: the last second of each 7-day step after start, through end.
std::vector<Timestamp> weekly_monitor_ends(Timestamp start, Timestamp end);

std::string oracle_csv(std::span<const OracleScore> scores);
std::string oracle_series_csv(std::span<const OracleSeries> series);

}  // namespace malstone
